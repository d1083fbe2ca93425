#include "pacc/mpc.hpp"

#include <algorithm>
#include <chrono>

namespace pacc {

StateVec RobotState::pack() const {
  StateVec x;
  x.segment<3>(kIdxEuler) = euler;
  x.segment<3>(kIdxPos) = r;
  x.segment<3>(kIdxOmega) = omega;
  x.segment<3>(kIdxVel) = rdot;
  for (int i = 0; i < kNumLegs; ++i) x.segment<3>(kIdxFeet + 3 * i) = feet[i];
  x.segment<6>(kIdxDist) = disturbance;
  return x;
}

RobotState RobotState::unpack(const StateVec& x) {
  RobotState s;
  s.euler = x.segment<3>(kIdxEuler);
  s.r = x.segment<3>(kIdxPos);
  s.omega = x.segment<3>(kIdxOmega);
  s.rdot = x.segment<3>(kIdxVel);
  for (int i = 0; i < kNumLegs; ++i) s.feet[i] = x.segment<3>(kIdxFeet + 3 * i);
  s.disturbance = x.segment<6>(kIdxDist);
  return s;
}

Eigen::Matrix<double, kStateDim, 1> MpcConfig::state_weights() const {
  Eigen::Matrix<double, kStateDim, 1> w;
  w.segment<3>(kIdxEuler).setConstant(w_orientation);
  w.segment<3>(kIdxPos) << w_position, w_position, w_position_z;
  w.segment<3>(kIdxOmega).setConstant(w_omega);
  w.segment<3>(kIdxVel).setConstant(w_velocity);
  w.segment<12>(kIdxFeet).setConstant(w_feet);
  w.segment<6>(kIdxDist).setConstant(w_disturbance);
  return w;
}

namespace {

void check_gimbal(const Vec3& euler) {
  if (std::abs(std::cos(euler.y())) < 1e-6) {
    throw GimbalLock("pitch at +-pi/2, Euler rate map singular");
  }
}

}  // namespace

StateVec srbd_derivative(const StateVec& x, const InputVec& u, const Vec4& delta,
                         const SrbdParams& params) {
  const Vec3 euler = x.segment<3>(kIdxEuler);
  check_gimbal(euler);
  const Vec3 r = x.segment<3>(kIdxPos);
  const Vec3 omega = x.segment<3>(kIdxOmega);
  const Vec3 rdot = x.segment<3>(kIdxVel);
  const Vec3 d_lin = x.segment<3>(kIdxDist);
  const Vec3 d_ang = x.segment<3>(kIdxDist + 3);

  const Mat3 w_eta = euler_rate_matrix(euler);
  const Mat3 r_wb = euler_zyx_to_rot(euler).transpose();  // world -> base
  const Vec3 g_vec(0.0, 0.0, -params.gravity);

  Vec3 force_sum = d_lin;
  Vec3 moment_world = d_ang;
  for (int i = 0; i < kNumLegs; ++i) {
    const Vec3 f = u.segment<3>(3 * i);
    force_sum += delta[i] * f;
    moment_world += delta[i] * (Vec3(x.segment<3>(kIdxFeet + 3 * i)) - r).cross(f);
  }

  const Mat3 inertia = params.inertia_diag.asDiagonal();
  const Vec3 omega_dot = inertia.inverse() * (-omega.cross(inertia * omega) + r_wb * moment_world);

  StateVec xdot;
  xdot.segment<3>(kIdxEuler) = w_eta * omega;
  xdot.segment<3>(kIdxPos) = rdot;
  xdot.segment<3>(kIdxOmega) = omega_dot;
  xdot.segment<3>(kIdxVel) = g_vec + force_sum / params.mass;
  for (int i = 0; i < kNumLegs; ++i) {
    xdot.segment<3>(kIdxFeet + 3 * i) = (1.0 - delta[i]) * u.segment<3>(kInputDim / 2 + 3 * i);
  }
  const double psi_dot = w_eta.row(2).dot(omega);
  xdot.segment<6>(kIdxDist) =
      disturbance_rate(rdot, psi_dot, params.kbar, params.delta_er_sq);
  return xdot;
}

void srbd_jacobians(const StateVec& x, const InputVec& u, const Vec4& delta,
                    const SrbdParams& params, Eigen::Matrix<double, kStateDim, kStateDim>* dfdx,
                    Eigen::Matrix<double, kStateDim, kInputDim>* dfdu) {
  const Vec3 euler = x.segment<3>(kIdxEuler);
  check_gimbal(euler);
  const Vec3 r = x.segment<3>(kIdxPos);
  const Vec3 omega = x.segment<3>(kIdxOmega);

  const Mat3 w_eta = euler_rate_matrix(euler);
  const Mat3 rot = euler_zyx_to_rot(euler);
  const Mat3 r_wb = rot.transpose();
  const Mat3 inertia = params.inertia_diag.asDiagonal();
  const Mat3 inertia_inv = inertia.inverse();

  Vec3 moment_world = x.segment<3>(kIdxDist + 3);
  Mat3 skew_f_sum = Mat3::Zero();
  for (int i = 0; i < kNumLegs; ++i) {
    const Vec3 f = u.segment<3>(3 * i);
    moment_world += delta[i] * (Vec3(x.segment<3>(kIdxFeet + 3 * i)) - r).cross(f);
    skew_f_sum += delta[i] * skew(f);
  }

  auto& a = *dfdx;
  auto& b = *dfdu;
  a.setZero();
  b.setZero();

  a.block<3, 3>(kIdxEuler, kIdxEuler) = euler_rate_jacobian_wrt_euler(euler, omega);
  a.block<3, 3>(kIdxEuler, kIdxOmega) = w_eta;
  a.block<3, 3>(kIdxPos, kIdxVel).setIdentity();

  for (int j = 0; j < 3; ++j) {
    const Mat3 drot = rot_derivative_wrt_euler(euler, j);
    a.block<3, 1>(kIdxOmega, kIdxEuler + j) = inertia_inv * (drot.transpose() * moment_world);
  }
  a.block<3, 3>(kIdxOmega, kIdxPos) = inertia_inv * r_wb * skew_f_sum;
  a.block<3, 3>(kIdxOmega, kIdxOmega) =
      inertia_inv * (skew(inertia * omega) - skew(omega) * inertia);
  for (int i = 0; i < kNumLegs; ++i) {
    const Vec3 f = u.segment<3>(3 * i);
    a.block<3, 3>(kIdxOmega, kIdxFeet + 3 * i) = -delta[i] * inertia_inv * r_wb * skew(f);
    b.block<3, 3>(kIdxOmega, 3 * i) =
        delta[i] * inertia_inv * r_wb * skew(Vec3(x.segment<3>(kIdxFeet + 3 * i)) - r);
    b.block<3, 3>(kIdxVel, 3 * i) = (delta[i] / params.mass) * Mat3::Identity();
    b.block<3, 3>(kIdxFeet + 3 * i, kInputDim / 2 + 3 * i) =
        (1.0 - delta[i]) * Mat3::Identity();
  }
  a.block<3, 3>(kIdxOmega, kIdxDist + 3) = inertia_inv * r_wb;
  a.block<3, 3>(kIdxVel, kIdxDist) = Mat3::Identity() / params.mass;

  a(kIdxDist + 0, kIdxVel + 0) = -params.kbar.x();
  a(kIdxDist + 1, kIdxVel + 1) = -params.kbar.y();
  const double c = -params.delta_er_sq * params.kbar.y();
  const Mat3 w_jac = euler_rate_jacobian_wrt_euler(euler, omega);
  a.block<1, 3>(kIdxDist + 5, kIdxEuler) = c * w_jac.row(2);
  a.block<1, 3>(kIdxDist + 5, kIdxOmega) = c * w_eta.row(2);
}

StateVec discrete_step(const StateVec& x, const InputVec& u, const Vec4& delta,
                       const SrbdParams& params, double dt) {
  return x + dt * srbd_derivative(x, u, delta, params);
}

Eigen::Matrix<double, 6, 1> disturbance_rate(const Vec3& rdot, double psi_dot, const Vec3& kbar,
                                             double delta_er_sq) {
  Eigen::Matrix<double, 6, 1> ddot = Eigen::Matrix<double, 6, 1>::Zero();
  ddot[0] = -kbar.x() * rdot.x();
  ddot[1] = -kbar.y() * rdot.y();
  ddot[5] = -delta_er_sq * kbar.y() * psi_dot;
  return ddot;
}

Eigen::Matrix<double, 6, 1> disturbance_direct(const Eigen::Matrix<double, 6, 1>& d0,
                                               const Vec3& kbar, const Vec3& delta_er,
                                               const Vec3& delta_er0, double delta_er_sq,
                                               double psi, double psi0) {
  Eigen::Matrix<double, 6, 1> d = d0;
  d[0] += kbar.x() * (delta_er.x() - delta_er0.x());
  d[1] += kbar.y() * (delta_er.y() - delta_er0.y());
  d[5] += -delta_er_sq * kbar.y() * (psi - psi0);
  return d;
}

Vec2 zmp_point(const Vec3& r, const Vec3& rddot, const Vec3& p_ee, const Vec3& d_lin, double mass,
               double gravity, double ground_z) {
  const double den = mass * gravity - d_lin.z();
  if (den <= 1e-6) throw DegenerateLoad("vertical load exceeds weight support");
  const double rz = r.z() - ground_z;
  const double pz = p_ee.z() - ground_z;
  const double nx =
      mass * gravity * r.x() - rz * mass * rddot.x() - p_ee.x() * d_lin.z() + pz * d_lin.x();
  const double ny =
      mass * gravity * r.y() - rz * mass * rddot.y() - p_ee.y() * d_lin.z() + pz * d_lin.y();
  return Vec2(nx / den, ny / den);
}

ZmpLinearization zmp_linearize(const StateVec& x, const InputVec& u, const Vec4& delta,
                               const SrbdParams& params, const Vec3& p_ee, double ground_z) {
  const Vec3 r = x.segment<3>(kIdxPos);
  const Vec3 d_lin = x.segment<3>(kIdxDist);
  Vec3 force_sum = d_lin;
  for (int i = 0; i < kNumLegs; ++i) force_sum += delta[i] * Vec3(u.segment<3>(3 * i));
  const Vec3 rddot = Vec3(0, 0, -params.gravity) + force_sum / params.mass;

  ZmpLinearization lin;
  lin.value = zmp_point(r, rddot, p_ee, d_lin, params.mass, params.gravity, ground_z);
  lin.dx.setZero();
  lin.du.setZero();

  const double den = params.mass * params.gravity - d_lin.z();
  const double rz = r.z() - ground_z;
  const double pz = p_ee.z() - ground_z;
  for (int axis = 0; axis < 2; ++axis) {
    lin.dx(axis, kIdxPos + axis) = params.mass * params.gravity / den;
    lin.dx(axis, kIdxPos + 2) = -params.mass * rddot[axis] / den;
    // d_lin enters both directly and through rddot
    lin.dx(axis, kIdxDist + axis) = (pz - rz) / den;
    lin.dx(axis, kIdxDist + 2) = (lin.value[axis] - p_ee[axis]) / den;
    for (int i = 0; i < kNumLegs; ++i) {
      lin.du(axis, 3 * i + axis) = -delta[i] * rz / den;
    }
  }
  return lin;
}

double SupportPolygon::margin_of(const Vec2& p) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : edges) m = std::min(m, e.offset - e.normal.dot(p));
  return m;
}

SupportPolygon support_polygon(const std::array<Vec3, kNumLegs>& feet_world,
                               const std::array<bool, kNumLegs>& stance, double margin) {
  std::vector<Vec2> pts;
  for (int i = 0; i < kNumLegs; ++i) {
    if (stance[i]) pts.emplace_back(feet_world[i].x(), feet_world[i].y());
  }
  if (pts.size() < 3) throw DegeneratePolygon("fewer than 3 stance feet");

  // monotone chain, CCW hull
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto cross2 = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * pts.size());
  int k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 1e-12) --k;
    hull[k++] = pts[i];
  }
  const int lower = k + 1;
  for (int i = static_cast<int>(pts.size()) - 2; i >= 0; --i) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 1e-12) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw DegeneratePolygon("stance feet are collinear");

  SupportPolygon poly;
  poly.vertices = hull;
  for (size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    const Vec2 dir = (b - a).normalized();
    const Vec2 normal(dir.y(), -dir.x());  // outward for a CCW polygon
    poly.edges.push_back({normal, normal.dot(a) - margin});
  }
  return poly;
}

Eigen::Matrix<double, 24, 1> friction_residuals(const InputVec& u, const Vec4& delta, double mu,
                                                double f_max) {
  Eigen::Matrix<double, 24, 1> res = Eigen::Matrix<double, 24, 1>::Zero();
  for (int i = 0; i < kNumLegs; ++i) {
    if (delta[i] <= 0.0) continue;
    const Vec3 f = u.segment<3>(3 * i);
    res[6 * i + 0] = f.x() - mu * f.z();
    res[6 * i + 1] = -f.x() - mu * f.z();
    res[6 * i + 2] = f.y() - mu * f.z();
    res[6 * i + 3] = -f.y() - mu * f.z();
    res[6 * i + 4] = f.z() - f_max;
    res[6 * i + 5] = -f.z();
  }
  return res;
}

Eigen::MatrixXd build_reference(double v_forward, double yaw_rate, const RobotState& state,
                                double desired_height, const TerrainPlaneRef& plane,
                                const MpcConfig& config) {
  const int n = config.horizon;
  Eigen::MatrixXd xref = Eigen::MatrixXd::Zero(kStateDim, n + 1);
  Vec2 xy = state.r.head<2>();
  for (int k = 0; k <= n; ++k) {
    const double yaw = state.euler.z() + yaw_rate * k * config.dt;
    const Vec2 heading(std::cos(yaw), std::sin(yaw));
    if (k > 0) xy += v_forward * heading * config.dt;
    const double s_fwd = plane.gradient.dot(heading);
    const double s_lat = plane.gradient.dot(Vec2(-heading.y(), heading.x()));
    xref.col(k).segment<3>(kIdxEuler) = Vec3(std::atan(s_lat), -std::atan(s_fwd), yaw);
    xref.col(k).segment<3>(kIdxPos) =
        Vec3(xy.x(), xy.y(), plane.height_at(xy) + desired_height);
    xref.col(k).segment<3>(kIdxOmega) = Vec3(0, 0, yaw_rate);
    xref.col(k).segment<3>(kIdxVel) =
        Vec3(v_forward * heading.x(), v_forward * heading.y(), v_forward * s_fwd);
  }
  return xref;
}

SrbdMpc::SrbdMpc(const MpcConfig& config) : config_(config) {}

void SrbdMpc::initialize_trajectory(const MpcInputs& inputs, const SrbdParams& params) {
  const int n = config_.horizon;
  x_traj_.resize(kStateDim, n + 1);
  u_traj_ = Eigen::MatrixXd::Zero(kInputDim, n);
  x_traj_.col(0) = inputs.x0;
  for (int k = 0; k < n; ++k) {
    const double cnt = std::max(1.0, inputs.contact.col(k).sum());
    for (int i = 0; i < kNumLegs; ++i) {
      if (inputs.contact(i, k) > 0.0) {
        u_traj_.col(k).segment<3>(3 * i) = Vec3(0, 0, params.mass * params.gravity / cnt);
      }
    }
    x_traj_.col(k + 1) =
        discrete_step(x_traj_.col(k), u_traj_.col(k), inputs.contact.col(k), params, config_.dt);
  }
}

void SrbdMpc::shift_trajectory(const MpcInputs& inputs, const SrbdParams& params) {
  const int n = config_.horizon;
  for (int k = 0; k < n; ++k) {
    x_traj_.col(k) = x_traj_.col(k + 1);
    if (k + 1 < n) u_traj_.col(k) = u_traj_.col(k + 1);
  }
  x_traj_.col(0) = inputs.x0;
  // re-gate inputs against the new contact sequence
  for (int k = 0; k < n; ++k) {
    const double cnt = std::max(1.0, inputs.contact.col(k).sum());
    for (int i = 0; i < kNumLegs; ++i) {
      if (inputs.contact(i, k) > 0.0) {
        u_traj_.col(k).segment<3>(kInputDim / 2 + 3 * i).setZero();
        if (u_traj_.col(k).segment<3>(3 * i).isZero()) {
          u_traj_.col(k).segment<3>(3 * i) = Vec3(0, 0, params.mass * params.gravity / cnt);
        }
      } else {
        u_traj_.col(k).segment<3>(3 * i).setZero();
      }
    }
  }
}

MpcSolution SrbdMpc::solve(const MpcInputs& inputs) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n = config_.horizon;
  SrbdParams params;
  params.mass = config_.mass;
  params.inertia_diag = config_.inertia_diag;
  params.gravity = config_.gravity;
  params.kbar = inputs.kbar;
  params.delta_er_sq = inputs.delta_er_sq;

  MpcSolution sol;
  auto finish = [&](MpcStatus status) {
    sol.status = status;
    sol.x_pred = x_traj_;
    sol.u = u_traj_;
    sol.solve_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
    return sol;
  };

  if (!has_previous_) {
    initialize_trajectory(inputs, params);
    has_previous_ = true;
  } else {
    shift_trajectory(inputs, params);
  }

  try {
    // reference with foot targets and wrapped yaw
    Eigen::MatrixXd xref = inputs.x_ref;
    for (int i = 0; i < kNumLegs; ++i) {
      bool lifted = false;
      for (int k = 0; k <= n; ++k) {
        if (k > 0 && inputs.contact(i, k - 1) <= 0.0) lifted = true;
        xref.col(k).segment<3>(kIdxFeet + 3 * i) =
            lifted ? inputs.foot_targets[i] : Vec3(inputs.x0.segment<3>(kIdxFeet + 3 * i));
      }
      xref.row(kIdxDist + 0).setConstant(inputs.x0(kIdxDist + 0));
      xref.row(kIdxDist + 1).setConstant(inputs.x0(kIdxDist + 1));
      xref.row(kIdxDist + 2).setConstant(inputs.x0(kIdxDist + 2));
    }
    for (int k = 0; k <= n; ++k) {
      double& yref = xref(kIdxEuler + 2, k);
      const double ycur = x_traj_(kIdxEuler + 2, std::min(k, n));
      while (yref - ycur > M_PI) yref -= 2.0 * M_PI;
      while (yref - ycur < -M_PI) yref += 2.0 * M_PI;
    }

    // linearize along the shifted trajectory
    std::vector<Eigen::Matrix<double, kStateDim, kStateDim>> a_mats(n);
    std::vector<Eigen::Matrix<double, kStateDim, kInputDim>> b_mats(n);
    std::vector<StateVec> defects(n);
    for (int k = 0; k < n; ++k) {
      const Vec4 delta = inputs.contact.col(k);
      Eigen::Matrix<double, kStateDim, kStateDim> dfdx;
      Eigen::Matrix<double, kStateDim, kInputDim> dfdu;
      srbd_jacobians(x_traj_.col(k), u_traj_.col(k), delta, params, &dfdx, &dfdu);
      a_mats[k] = Eigen::Matrix<double, kStateDim, kStateDim>::Identity() + config_.dt * dfdx;
      b_mats[k] = config_.dt * dfdu;
      defects[k] = StateVec(x_traj_.col(k)) +
                   config_.dt * srbd_derivative(x_traj_.col(k), u_traj_.col(k), delta, params) -
                   StateVec(x_traj_.col(k + 1));
    }

    // condensing: dx_k = d[k] + M[k] * du_active
    const int nu = 12 * n;
    std::vector<Eigen::MatrixXd> m_rows(n + 1);
    std::vector<StateVec> d_terms(n + 1);
    m_rows[0] = Eigen::MatrixXd::Zero(kStateDim, nu);
    d_terms[0] = inputs.x0 - x_traj_.col(0);  // zero by construction
    for (int k = 0; k < n; ++k) {
      m_rows[k + 1] = Eigen::MatrixXd::Zero(kStateDim, nu);
      if (k > 0) {
        m_rows[k + 1].leftCols(12 * k) = a_mats[k] * m_rows[k].leftCols(12 * k);
      }
      for (int i = 0; i < kNumLegs; ++i) {
        const bool st = inputs.contact(i, k) > 0.0;
        m_rows[k + 1].block<kStateDim, 3>(0, 12 * k + 3 * i) =
            st ? b_mats[k].block<kStateDim, 3>(0, 3 * i)
               : b_mats[k].block<kStateDim, 3>(0, kInputDim / 2 + 3 * i);
      }
      d_terms[k + 1] = a_mats[k] * d_terms[k] + defects[k];
    }

    // support polygons along the horizon (predicted feet). Around contact
    // switches the ZMP must satisfy both the old and the new stance set, so
    // gait events that fall between model samples stay covered.
    std::vector<std::vector<SupportPolygon>> polys(n);
    Vec4 prev_delta = inputs.contact_now;
    for (int k = 0; k < n; ++k) {
      std::array<Vec3, kNumLegs> feet;
      std::array<bool, kNumLegs> stance;
      for (int i = 0; i < kNumLegs; ++i) {
        feet[i] = x_traj_.col(k).segment<3>(kIdxFeet + 3 * i);
        stance[i] = inputs.contact(i, k) > 0.0;
      }
      polys[k].push_back(
          support_polygon(feet, stance, config_.zmp_margin + config_.zmp_margin_padding));
      if ((inputs.contact.col(k) - prev_delta).cwiseAbs().maxCoeff() > 0.0) {
        std::array<bool, kNumLegs> stance_prev;
        for (int i = 0; i < kNumLegs; ++i) stance_prev[i] = prev_delta[i] > 0.0;
        try {
          polys[k].push_back(
              support_polygon(feet, stance_prev, config_.zmp_margin + config_.zmp_margin_padding));
        } catch (const DegeneratePolygon&) {
        }
      }
      prev_delta = inputs.contact.col(k);
    }
    const int n_slack = n;  // one shared relaxation per horizon step

    const int nv = nu + n_slack;
    Eigen::MatrixXd p_mat = Eigen::MatrixXd::Zero(nv, nv);
    Eigen::VectorXd q_vec = Eigen::VectorXd::Zero(nv);

    const Eigen::Matrix<double, kStateDim, 1> wx = config_.state_weights();
    const Eigen::Matrix<double, kStateDim, 1> wx_sqrt = wx.cwiseSqrt();
    for (int k = 1; k <= n; ++k) {
      const int cols = 12 * std::min(k, n);
      const Eigen::MatrixXd scaled = wx_sqrt.asDiagonal() * m_rows[k].leftCols(cols);
      p_mat.topLeftCorner(cols, cols).selfadjointView<Eigen::Lower>().rankUpdate(
          scaled.transpose(), 2.0);
      const StateVec err = StateVec(x_traj_.col(k)) + d_terms[k] - StateVec(xref.col(k));
      q_vec.head(cols) += 2.0 * m_rows[k].leftCols(cols).transpose() * wx.cwiseProduct(err);
    }
    p_mat.topLeftCorner(nu, nu) =
        p_mat.topLeftCorner(nu, nu).selfadjointView<Eigen::Lower>();

    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < kNumLegs; ++i) {
        const bool st = inputs.contact(i, k) > 0.0;
        const double w = st ? config_.w_force : config_.w_foot_velocity;
        const int c = 12 * k + 3 * i;
        const Vec3 u_abs = st ? Vec3(u_traj_.col(k).segment<3>(3 * i))
                              : Vec3(u_traj_.col(k).segment<3>(kInputDim / 2 + 3 * i));
        for (int j = 0; j < 3; ++j) {
          p_mat(c + j, c + j) += 2.0 * w;
          q_vec(c + j) += 2.0 * w * u_abs[j];
        }
      }
    }
    for (int s = 0; s < n_slack; ++s) p_mat(nu + s, nu + s) = 2.0 * config_.slack_weight;

    // constraint rows: friction boxes + linearized ZMP (with slack) + slack >= 0.
    // The ZMP is pinned at both interval endpoints: the force is held over the
    // interval, so the in-between path deviates from the endpoint chord only
    // by rddot * dt^2 / 8.
    int n_friction = 0;
    for (int k = 0; k < n; ++k) n_friction += 6 * static_cast<int>(inputs.contact.col(k).sum());
    int n_zmp = 0;
    for (int k = 0; k < n; ++k) {
      for (const auto& poly : polys[k]) n_zmp += 2 * static_cast<int>(poly.edges.size());
    }
    const int mg_rows = n_friction + n_zmp + n_slack;
    Eigen::MatrixXd g_mat = Eigen::MatrixXd::Zero(mg_rows, nv);
    Eigen::VectorXd h_vec = Eigen::VectorXd::Zero(mg_rows);

    int row = 0;
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < kNumLegs; ++i) {
        if (inputs.contact(i, k) <= 0.0) continue;
        const int c = 12 * k + 3 * i;
        const Vec3 f = u_traj_.col(k).segment<3>(3 * i);
        const double mu = config_.mu;
        g_mat(row, c + 0) = 1;  g_mat(row, c + 2) = -mu;
        h_vec(row++) = -(f.x() - mu * f.z());
        g_mat(row, c + 0) = -1; g_mat(row, c + 2) = -mu;
        h_vec(row++) = -(-f.x() - mu * f.z());
        g_mat(row, c + 1) = 1;  g_mat(row, c + 2) = -mu;
        h_vec(row++) = -(f.y() - mu * f.z());
        g_mat(row, c + 1) = -1; g_mat(row, c + 2) = -mu;
        h_vec(row++) = -(-f.y() - mu * f.z());
        g_mat(row, c + 2) = 1;
        h_vec(row++) = config_.f_max - f.z();
        g_mat(row, c + 2) = -1;
        h_vec(row++) = f.z();
      }
    }

    for (int k = 0; k < n; ++k) {
      const Vec4 delta = inputs.contact.col(k);
      const ZmpLinearization lin[2] = {
          zmp_linearize(x_traj_.col(k), u_traj_.col(k), delta, params, inputs.p_ee_hat,
                        inputs.ground_z),
          zmp_linearize(x_traj_.col(k + 1), u_traj_.col(k), delta, params, inputs.p_ee_hat,
                        inputs.ground_z)};
      for (int end = 0; end < 2; ++end) {
        const int xk = k + end;
        const int cols = 12 * std::min(xk, n);
        for (const auto& poly : polys[k]) {
          for (const auto& edge : poly.edges) {
            const Eigen::RowVector2d nrm(edge.normal.x(), edge.normal.y());
            if (cols > 0) {
              g_mat.block(row, 0, 1, cols) = nrm * lin[end].dx * m_rows[xk].leftCols(cols);
            }
            // direct input dependence (forces of step k)
            const Eigen::Matrix<double, 1, kInputDim> du_row = nrm * lin[end].du;
            for (int i = 0; i < kNumLegs; ++i) {
              if (delta[i] > 0.0) {
                g_mat.block<1, 3>(row, 12 * k + 3 * i) += du_row.segment<3>(3 * i);
              }
            }
            g_mat(row, nu + k) = -1.0;
            h_vec(row) = edge.offset - nrm * (lin[end].value + lin[end].dx * d_terms[xk]);
            ++row;
          }
        }
      }
    }
    for (int s = 0; s < n_slack; ++s) {
      g_mat(row, nu + s) = -1.0;
      h_vec(row++) = 0.0;
    }

    QpProblem qp{p_mat, q_vec, g_mat, h_vec};
    const QpResult res = solve_qp(qp, config_.qp);

    // apply the full Newton step and store the new iterate
    const Eigen::VectorXd du = res.z.head(nu);
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < kNumLegs; ++i) {
        const Eigen::Vector3d step = du.segment<3>(12 * k + 3 * i);
        if (inputs.contact(i, k) > 0.0) {
          u_traj_.col(k).segment<3>(3 * i) += step;
        } else {
          u_traj_.col(k).segment<3>(kInputDim / 2 + 3 * i) += step;
        }
      }
    }
    for (int k = 1; k <= n; ++k) {
      x_traj_.col(k) += d_terms[k] + m_rows[k].leftCols(12 * std::min(k, n)) *
                                         du.head(12 * std::min(k, n));
    }

    sol.slack_max = n_slack > 0 ? std::max(0.0, res.z.tail(n_slack).maxCoeff()) : 0.0;
    sol.qp_iterations = res.iterations;
    sol.kkt_dual = res.dual_residual;
    sol.kkt_primal = res.primal_residual;
    sol.kkt_gap = res.complementarity;
    return finish(res.status == QpStatus::kOptimal ? MpcStatus::kOptimal
                                                   : MpcStatus::kMaxIterations);
  } catch (const std::runtime_error&) {
    // keep the shifted previous solution
    return finish(MpcStatus::kFallback);
  }
}

}  // namespace pacc
