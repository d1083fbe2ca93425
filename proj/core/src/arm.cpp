#include "pacc/arm.hpp"

#include <array>

namespace pacc {
namespace {

// Elevation angles (from +x, in the arm x-z plane) of the three moving
// segments at q = 0, fixed by the interior bend angles. AB points straight up.
struct ChainGeometry {
  double e1, e2, e3;
  Vec3 u1, u2, u3;  // link-local segment directions
};

ChainGeometry chain_geometry(const ArmParams& p) {
  ChainGeometry g;
  g.e1 = p.ang_abc - M_PI / 2.0;
  g.e2 = g.e1 + M_PI - p.ang_bcd;
  g.e3 = g.e2 - M_PI + p.ang_cde;
  g.u1 = Vec3(std::cos(g.e1), 0.0, std::sin(g.e1));
  g.u2 = Vec3(std::cos(g.e2), 0.0, std::sin(g.e2));
  g.u3 = Vec3(std::cos(g.e3), 0.0, std::sin(g.e3));
  return g;
}

struct LinkKin {
  Vec3 origin;   // joint position
  Vec3 axis;     // joint axis, arm base frame
  Vec3 tip;      // distal end of the link segment
  Vec3 com;
  double mass;
  double length;
  Vec3 seg_dir;  // unit, origin -> tip
};

std::array<LinkKin, 3> link_kinematics(const ArmParams& p, const Vec3& q, ArmFrames* frames) {
  const ChainGeometry g = chain_geometry(p);
  const Mat3 r1 = rot_z(q.x());
  const Mat3 r2 = r1 * rot_y(q.y());
  const Mat3 r3 = r1 * rot_y(q.y() + q.z());

  const Vec3 p_a = Vec3::Zero();
  const Vec3 p_b(0.0, 0.0, p.len_ab);
  const Vec3 p_c = p_b + r1 * (p.len_bc * g.u1);
  const Vec3 p_d = p_c + r2 * (p.len_cd * g.u2);
  const Vec3 p_e = p_d + r3 * (p.len_de * g.u3);

  if (frames) {
    frames->p_a = p_a;
    frames->p_b = p_b;
    frames->p_c = p_c;
    frames->p_d = p_d;
    frames->p_e = p_e;
    frames->r_link1 = r1;
    frames->r_link2 = r2;
    frames->r_link3 = r3;
  }

  const Vec3 pitch_axis = r1 * Vec3::UnitY();
  std::array<LinkKin, 3> links;
  links[0] = {p_b, Vec3::UnitZ(), p_c, 0.5 * (p_b + p_c), p.link_masses[1], p.len_bc,
              (p_c - p_b).normalized()};
  links[1] = {p_c, pitch_axis, p_d, 0.5 * (p_c + p_d), p.link_masses[2], p.len_cd,
              (p_d - p_c).normalized()};
  links[2] = {p_d, pitch_axis, p_e, 0.5 * (p_d + p_e), p.link_masses[3], p.len_de,
              (p_e - p_d).normalized()};
  return links;
}

Mat3 rod_inertia_world(const LinkKin& l) {
  return (l.mass * l.length * l.length / 12.0) *
         (Mat3::Identity() - l.seg_dir * l.seg_dir.transpose());
}

// Recursive Newton-Euler in the arm base frame; gravity enters through the
// base-acceleration trick. Returns the joint torque needed to realize
// (q, qd, qdd), i.e. M qdd + C qd + G.
Vec3 rne(const ArmParams& p, const Vec3& q, const Vec3& qd, const Vec3& qdd,
         const Vec3& gravity_dir) {
  const auto links = link_kinematics(p, q, nullptr);

  std::array<Vec3, 3> omega, alpha, a_com;
  std::array<Vec3, 4> a_origin;  // a_origin[i] = acceleration of links[i].origin
  Vec3 w = Vec3::Zero(), dw = Vec3::Zero();
  a_origin[0] = -gravity_dir;
  for (int i = 0; i < 3; ++i) {
    const LinkKin& l = links[i];
    dw = dw + l.axis * qdd[i] + w.cross(l.axis * qd[i]);
    w = w + l.axis * qd[i];
    omega[i] = w;
    alpha[i] = dw;
    const Vec3 rc = l.com - l.origin;
    a_com[i] = a_origin[i] + dw.cross(rc) + w.cross(w.cross(rc));
    const Vec3 rt = l.tip - l.origin;
    a_origin[i + 1] = a_origin[i] + dw.cross(rt) + w.cross(w.cross(rt));
  }

  Vec3 f_child = Vec3::Zero(), n_child = Vec3::Zero();  // wrench about child joint
  Vec3 tau = Vec3::Zero();
  for (int i = 2; i >= 0; --i) {
    const LinkKin& l = links[i];
    const Mat3 inertia = rod_inertia_world(l);
    const Vec3 force = l.mass * a_com[i];
    const Vec3 moment = inertia * alpha[i] + omega[i].cross(inertia * omega[i]);
    const Vec3 n_i = moment + (l.com - l.origin).cross(force) + n_child +
                     (l.tip - l.origin).cross(f_child);
    f_child = force + f_child;
    n_child = n_i;
    tau[i] = l.axis.dot(n_i);
  }
  return tau;
}

}  // namespace

bool ArmParams::valid() const {
  const bool lengths = len_ab > 0 && len_bc > 0 && len_cd > 0 && len_de > 0;
  const bool impedances = (joint_stiffness.array() >= 0).all() && (joint_damping.array() >= 0).all();
  const bool masses = (link_masses.array() >= 0).all();
  return lengths && impedances && masses && gravity > 0;
}

ArmFrames forward_kinematics(const ArmParams& params, const Vec3& q) {
  ArmFrames frames;
  link_kinematics(params, q, &frames);
  return frames;
}

Mat3 ee_jacobian(const ArmParams& params, const Vec3& q) {
  ArmFrames f;
  const auto links = link_kinematics(params, q, &f);
  Mat3 jac;
  for (int i = 0; i < 3; ++i) {
    jac.col(i) = links[i].axis.cross(f.p_e - links[i].origin);
  }
  return jac;
}

bool jacobian_singular(const ArmParams& params, const Mat3& jac) {
  return std::abs(jac.determinant()) < params.singularity_tol;
}

Vec3 gravity_torque(const ArmParams& params, const Vec3& q, const Vec3& gravity_dir) {
  const auto links = link_kinematics(params, q, nullptr);
  Vec3 tau = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    // point Jacobian of the link CoM, column j = axis_j x (com - origin_j)
    for (int j = 0; j <= i; ++j) {
      const Vec3 col = links[j].axis.cross(links[i].com - links[j].origin);
      tau[j] += links[i].mass * col.dot(gravity_dir);
    }
  }
  return tau;
}

Vec3 spring_torque(const ArmParams& params, const Vec3& q) {
  Vec3 tau = -params.joint_stiffness.cwiseProduct(q - params.spring_equilibrium);
  if (params.third_joint_mode == SpringMode::kAsymmetric) {
    tau.z() += params.third_joint_pretorque;
  }
  return tau;
}

Vec3 damping_torque(const ArmParams& params, const Vec3& qd) {
  return -params.joint_damping.cwiseProduct(qd);
}

ForceEstimateResult estimate_ee_force(const ArmParams& params, const ArmState& state,
                                      const Vec3& gravity_dir) {
  ForceEstimateResult out;
  const Mat3 jac = ee_jacobian(params, state.q);
  out.det_jacobian = jac.determinant();
  if (std::abs(out.det_jacobian) < params.singularity_tol) {
    out.singular = true;
    return out;
  }
  const Vec3 tau = gravity_torque(params, state.q, gravity_dir) + spring_torque(params, state.q) +
                   damping_torque(params, state.qd);
  out.f_ee = -jac.transpose().partialPivLu().solve(tau);
  return out;
}

EeWrenchEstimate wrench_at_com(const Vec3& f_ee_base, const Mat3& r_base_to_world,
                               const Vec3& p_ee_base) {
  EeWrenchEstimate w;
  w.f_ee_hat = f_ee_base;
  w.p_ee_base = p_ee_base;
  w.f_ext = r_base_to_world * f_ee_base;
  w.tau_ext = r_base_to_world * p_ee_base.cross(f_ee_base);
  return w;
}

Mat3 mass_matrix(const ArmParams& params, const Vec3& q) {
  Mat3 m;
  for (int j = 0; j < 3; ++j) {
    m.col(j) = rne(params, q, Vec3::Zero(), Vec3::Unit(j), Vec3::Zero());
  }
  return 0.5 * (m + m.transpose());  // clean up rounding asymmetry
}

Vec3 inverse_dynamics(const ArmParams& params, const Vec3& q, const Vec3& qd, const Vec3& qdd,
                      const Vec3& gravity_dir) {
  return rne(params, q, qd, qdd, gravity_dir);
}

Vec3 forward_dynamics(const ArmParams& params, const ArmState& state, const Vec3& f_ee_applied,
                      const Vec3& gravity_dir) {
  const Vec3 bias = rne(params, state.q, state.qd, Vec3::Zero(), gravity_dir);  // C qd + G
  const Mat3 jac = ee_jacobian(params, state.q);
  const Vec3 rhs = spring_torque(params, state.q) + damping_torque(params, state.qd) +
                   jac.transpose() * f_ee_applied - bias;
  return mass_matrix(params, state.q).ldlt().solve(rhs);
}

double total_energy(const ArmParams& params, const ArmState& state, const Vec3& gravity_dir) {
  const auto links = link_kinematics(params, state.q, nullptr);
  double potential = 0.0;
  for (const auto& l : links) potential -= l.mass * gravity_dir.dot(l.com);
  const Vec3 dq = state.q - params.spring_equilibrium;
  potential += 0.5 * dq.cwiseProduct(dq).dot(params.joint_stiffness);
  if (params.third_joint_mode == SpringMode::kAsymmetric) {
    potential -= params.third_joint_pretorque * state.q.z();
  }
  const double kinetic = 0.5 * state.qd.dot(mass_matrix(params, state.q) * state.qd);
  return kinetic + potential;
}

std::optional<Vec3> cartesian_stiffness_diag(const ArmParams& params, const Vec3& q,
                                             const Mat3& r_base_to_world) {
  const Mat3 jac = ee_jacobian(params, q);
  if (jacobian_singular(params, jac)) return std::nullopt;
  const Mat3 a = r_base_to_world * jac;
  const Mat3 a_inv = a.partialPivLu().inverse();
  const Mat3 k = a_inv.transpose() * params.joint_stiffness.asDiagonal() * a_inv;
  return Vec3(k.diagonal());
}

ForceEstimator::Output ForceEstimator::update(const ArmParams& params, const ArmState& state,
                                              const Vec3& gravity_dir, const Mat3& r_arm_to_world,
                                              double t) {
  const ForceEstimateResult est = estimate_ee_force(params, state, gravity_dir);
  if (!est.singular) {
    Output out;
    out.f_ee = est.f_ee;
    const auto kbar = cartesian_stiffness_diag(params, state.q, r_arm_to_world);
    out.kbar_diag = kbar ? *kbar : last_.kbar_diag;
    out.valid = true;
    out.held = false;
    last_ = out;
    last_valid_time_ = t;
    has_estimate_ = true;
    return out;
  }
  if (has_estimate_ && (t - last_valid_time_) <= hold_limit_) {
    Output out = last_;
    out.held = true;
    out.valid = true;
    return out;
  }
  Output out = last_;
  out.valid = false;
  out.held = true;
  return out;
}

}  // namespace pacc
