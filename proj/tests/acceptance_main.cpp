// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "pacc/arm.hpp"
#include "pacc/config.hpp"
#include "pacc/gait.hpp"
#include "pacc/guidance.hpp"
#include "pacc/mpc.hpp"
#include "pacc/trace.hpp"
#include "pacc/world.hpp"

using namespace pacc;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// ---- criterion 1: link-3 pendulum period ---------------------------------

double pendulum_period(double payload_mass) {
  ArmParams p;
  p.joint_stiffness = Vec3(500.0, 500.0, 0.0);
  p.joint_damping = Vec3(10.0, 10.0, 0.0);
  const Vec3 g(0, 0, -p.gravity);
  const double q3_eq = p.ang_abc - p.ang_bcd + p.ang_cde;

  ArmState s;
  s.q = Vec3(0, 0, q3_eq + 0.05);
  Vec3 payload = forward_kinematics(p, s.q).p_e;
  Vec3 payload_vel = Vec3::Zero();
  const double k_att = 2e4, c_att = 40.0, dt = 2e-4;

  std::vector<double> crossings;
  double prev = s.q.z() - q3_eq;
  for (long i = 0; i < std::lround(8.0 / dt); ++i) {
    const ArmFrames f = forward_kinematics(p, s.q);
    const Vec3 hook_vel = ee_jacobian(p, s.q) * s.qd;
    const Vec3 f_spring = k_att * (payload - f.p_e) + c_att * (payload_vel - hook_vel);
    const Vec3 qdd = forward_dynamics(p, s, f_spring, g);
    s.qd += dt * qdd;
    s.q += dt * s.qd;
    payload_vel += dt * (g - f_spring / payload_mass);
    payload += dt * payload_vel;
    const double x = s.q.z() - q3_eq;
    if (prev < 0.0 && x >= 0.0) crossings.push_back(i * dt);
    prev = x;
  }
  if (crossings.size() < 3) return 0.0;
  return (crossings.back() - crossings.front()) / (crossings.size() - 1);
}

void criterion_1() {
  const double t0 = now_s();
  const double period = pendulum_period(2.0);
  const double wall = now_s() - t0;
  const double nominal = 2 * M_PI * std::sqrt(0.277 / 9.81);
  const double err = std::abs(period - nominal) / nominal;
  report(1, err < 0.05 && wall < 5.0,
         fmt("pendulum period %.4f s vs %.4f s (err %.2f%%), runtime %.2f s", period, nominal,
             100 * err, wall));
}

// ---- criterion 2: static force estimation --------------------------------

Vec3 settle_arm(const ArmParams& params, const Vec3& f_ee, double duration) {
  ArmParams damped = params;
  damped.joint_damping = Vec3(1.0, 2.0, 0.5);
  const Vec3 g(0, 0, -params.gravity);
  ArmState s;
  const double dt = 1e-3;
  for (long i = 0; i < std::lround(duration / dt); ++i) {
    const Vec3 qdd = forward_dynamics(damped, s, f_ee, g);
    s.qd += dt * qdd;
    s.q += dt * s.qd;
  }
  return s.q;
}

void criterion_2() {
  ArmParams p;
  bool pass = true;
  std::string detail;
  for (double mass : {2.0, 7.0}) {
    const double w = mass * 9.81;
    const Vec3 q = settle_arm(p, Vec3(0, 0, -w), 30.0);
    const ForceEstimateResult est =
        estimate_ee_force(p, ArmState{q, Vec3::Zero()}, Vec3(0, 0, -p.gravity));
    const double err = std::abs(est.f_ee.z() + w) / w;
    const double lateral = std::max(std::abs(est.f_ee.x()), std::abs(est.f_ee.y()));
    pass = pass && !est.singular && err < 0.02 && lateral < 0.5;
    detail += fmt("%skg: fz %.2f N (err %.2f%%, |xy| %.3f N)", mass == 2.0 ? "2" : "; 7",
                  est.f_ee.z(), 100 * err, lateral);
  }
  report(2, pass, detail);
}

// ---- criterion 3: standstill MPC equilibrium ------------------------------

void criterion_3() {
  MpcConfig cfg;
  SrbdMpc mpc(cfg);
  MpcInputs in;
  RobotState s;
  s.r = Vec3(0, 0, 0.35);
  s.feet[0] = Vec3(0.24, 0.15, 0);
  s.feet[1] = Vec3(0.24, -0.15, 0);
  s.feet[2] = Vec3(-0.24, 0.15, 0);
  s.feet[3] = Vec3(-0.24, -0.15, 0);
  in.x0 = s.pack();
  in.contact = Eigen::MatrixXd::Ones(4, cfg.horizon);
  for (int i = 0; i < 4; ++i) in.foot_targets[i] = s.feet[i];
  in.p_ee_hat = Vec3(0.57, 0, 0.42);
  in.delta_er_sq = (in.p_ee_hat - s.r).squaredNorm();
  in.x_ref = build_reference(0, 0, s, 0.35, TerrainPlaneRef{}, cfg);

  const double t0 = now_s();
  const MpcSolution sol = mpc.solve(in);
  const double ms = 1e3 * (now_s() - t0);

  double fz = 0;
  for (int i = 0; i < 4; ++i) fz += sol.u0()[3 * i + 2];
  const double target = 206.01;
  const double err = std::abs(fz - target) / target;

  Vec3 fsum = Vec3::Zero();
  for (int i = 0; i < 4; ++i) fsum += Vec3(sol.u0().segment<3>(3 * i));
  const Vec2 zmp = zmp_point(s.r, Vec3(0, 0, -cfg.gravity) + fsum / cfg.mass, in.p_ee_hat,
                             Vec3::Zero(), cfg.mass, cfg.gravity);
  std::array<bool, 4> stance{true, true, true, true};
  const double margin = support_polygon(s.feet, stance, 0.0).margin_of(zmp);

  const bool pass = sol.status == MpcStatus::kOptimal && err < 1e-3 && sol.slack_max < 1e-6 &&
                    margin >= cfg.zmp_margin - 1e-6 && ms < 50.0;
  report(3, pass,
         fmt("sum fz %.3f N (err %.4f%%), slack %.2e, zmp inside by %.3f m, solve %.1f ms", fz,
             100 * err, sol.slack_max, margin, ms));
}

// ---- criterion 4: ZMP formula reductions ----------------------------------

void criterion_4() {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst_cart = 0.0, worst_shift = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 r(u(rng), u(rng), 0.3 + 0.3 * std::abs(u(rng)));
    const Vec3 rddot(3 * u(rng), 3 * u(rng), 3 * u(rng));
    const Vec3 p_ee(u(rng), u(rng), 0.2 + 0.4 * std::abs(u(rng)));
    const Vec2 z = zmp_point(r, rddot, p_ee, Vec3::Zero(), 21.0, kGravity);
    const Vec2 cart(r.x() - r.z() * rddot.x() / kGravity, r.y() - r.z() * rddot.y() / kGravity);
    worst_cart = std::max(worst_cart,
                          (z - cart).cwiseAbs().maxCoeff() /
                              std::max(1.0, cart.cwiseAbs().maxCoeff()));

    const Vec3 f(30 * u(rng), 30 * u(rng), 50 * u(rng));
    const Vec3 p_ee_h(p_ee.x() - r.x(), p_ee.y() - r.y(), p_ee.z());
    const Vec2 delta = foothold_force_correction(f, p_ee_h, 21.0);
    const Vec2 shift = zmp_point(r, Vec3::Zero(), p_ee, f, 21.0, kGravity) - Vec2(r.head<2>());
    worst_shift = std::max(worst_shift, (delta - shift).cwiseAbs().maxCoeff());
  }
  report(4, worst_cart < 1e-12 && worst_shift < 1e-9,
         fmt("table-cart max rel err %.2e; delta_pa vs static shift max err %.2e", worst_cart,
             worst_shift));
}

// ---- criterion 5: disturbance model consistency ----------------------------

void criterion_5() {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int traj = 0; traj < 100; ++traj) {
    const Vec3 kbar(40 * std::abs(u(rng)), 40 * std::abs(u(rng)), 40 * std::abs(u(rng)));
    const Vec3 p_ee(u(rng), u(rng), 0.5);
    Vec3 r(0.2 * u(rng), 0.2 * u(rng), 0.35);
    Vec3 rdot(0.3 * u(rng), 0.3 * u(rng), 0.1 * u(rng));
    double psi = u(rng), psidot = 0.5 * u(rng);
    Eigen::Matrix<double, 6, 1> d0;
    for (int i = 0; i < 6; ++i) d0[i] = 20 * u(rng);
    const Vec3 delta_er0 = p_ee - r;
    const double s_frozen = delta_er0.squaredNorm();
    const double psi0 = psi;
    Eigen::Matrix<double, 6, 1> d = d0;
    const double dt = 0.04;
    for (int k = 0; k < 15; ++k) {
      d += dt * disturbance_rate(rdot, psidot, kbar, s_frozen);
      r += dt * rdot;
      psi += dt * psidot;
      rdot += dt * Vec3(u(rng), u(rng), u(rng));
      psidot += dt * u(rng);
      const auto direct = disturbance_direct(d0, kbar, p_ee - r, delta_er0, s_frozen, psi, psi0);
      const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
      worst = std::max(worst, (d - direct).cwiseAbs().maxCoeff() / scale);
    }
  }
  report(5, worst < 1e-6, fmt("max relative mismatch %.2e over 100 trajectories", worst));
}

// ---- criterion 6: linearization check --------------------------------------

void criterion_6() {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    StateVec x;
    x.segment<3>(kIdxEuler) = Vec3(0.4 * u(rng), 0.4 * u(rng), 2.5 * u(rng));
    x.segment<3>(kIdxPos) = Vec3(u(rng), u(rng), 0.3 + 0.2 * std::abs(u(rng)));
    x.segment<3>(kIdxOmega) = Vec3(u(rng), u(rng), u(rng));
    x.segment<3>(kIdxVel) = Vec3(u(rng), u(rng), 0.5 * u(rng));
    for (int i = 0; i < 4; ++i) {
      x.segment<3>(kIdxFeet + 3 * i) = x.segment<3>(kIdxPos) + Vec3(0.3 * u(rng), 0.25 * u(rng),
                                                                     -0.3 - 0.05 * u(rng));
    }
    for (int i = 0; i < 6; ++i) x[kIdxDist + i] = 30 * u(rng);
    InputVec uu;
    for (int i = 0; i < kInputDim; ++i) uu[i] = 40 * u(rng);
    SrbdParams p;
    p.kbar = Vec3(60 * std::abs(u(rng)), 60 * std::abs(u(rng)), 60 * std::abs(u(rng)));
    p.delta_er_sq = 0.3 + 0.5 * std::abs(u(rng));
    Vec4 delta;
    for (int i = 0; i < 4; ++i) delta[i] = u(rng) > 0 ? 1.0 : 0.0;

    Eigen::Matrix<double, kStateDim, kStateDim> a;
    Eigen::Matrix<double, kStateDim, kInputDim> b;
    srbd_jacobians(x, uu, delta, p, &a, &b);
    for (int j = 0; j < kStateDim; ++j) {
      StateVec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const StateVec col =
          (srbd_derivative(xp, uu, delta, p) - srbd_derivative(xm, uu, delta, p)) / (2 * h);
      for (int i = 0; i < kStateDim; ++i) {
        worst = std::max(worst, std::abs(a(i, j) - col[i]) / std::max(1.0, std::abs(col[i])));
      }
    }
    for (int j = 0; j < kInputDim; ++j) {
      InputVec up = uu, um = uu;
      up[j] += h;
      um[j] -= h;
      const StateVec col =
          (srbd_derivative(x, up, delta, p) - srbd_derivative(x, um, delta, p)) / (2 * h);
      for (int i = 0; i < kStateDim; ++i) {
        worst = std::max(worst, std::abs(b(i, j) - col[i]) / std::max(1.0, std::abs(col[i])));
      }
    }
  }
  report(6, worst < 1e-5, fmt("max relative jacobian error %.2e on 100 random states", worst));
}

// ---- criteria 7/8: scenarios ------------------------------------------------

struct ScenarioOutcome {
  RunResult res;
  TraceTable trace;
};

ScenarioOutcome run_kind(ScenarioKind kind, const std::string& out_dir) {
  ScenarioConfig cfg = default_config(kind);
  cfg.run.out_dir = out_dir;
  ScenarioOutcome out;
  out.res = run_scenario(cfg);
  out.trace = read_trace_csv(out.res.trace_path);
  return out;
}

double hook_distance_bound(const TraceTable& t) {
  // follower hook x span vs leader hook: use logged payload position and the
  // follower/leader base positions as a proxy is too loose; instead use the
  // logged arm states. The trace stores base pose and q_a for both robots, so
  // reconstruct the hook positions exactly.
  ArmParams arm;
  const int lqa = t.column("l_qa_1"), fqa = t.column("f_qa_1");
  const int lr = t.column("l_r_x"), fr = t.column("f_r_x");
  const int lth = t.column("l_roll"), fth = t.column("f_roll");
  double worst = 0.0;
  for (const auto& row : t.rows) {
    const Vec3 ql(row[lqa], row[lqa + 1], row[lqa + 2]);
    const Vec3 qf(row[fqa], row[fqa + 1], row[fqa + 2]);
    const Vec3 rl(row[lr], row[lr + 1], row[lr + 2]);
    const Vec3 rf(row[fr], row[fr + 1], row[fr + 2]);
    const Mat3 rot_l = euler_zyx_to_rot(Vec3(row[lth], row[lth + 1], row[lth + 2]));
    const Mat3 rot_f = euler_zyx_to_rot(Vec3(row[fth], row[fth + 1], row[fth + 2]));
    const Vec3 hook_l =
        rl + rot_l * (Vec3(-0.30, 0, 0.05) + rot_z(M_PI) * forward_kinematics(arm, ql).p_e);
    const Vec3 hook_f =
        rf + rot_f * (Vec3(0.30, 0, 0.05) + forward_kinematics(arm, qf).p_e);
    worst = std::max(worst, std::abs((hook_l - hook_f).norm() - 1.0));
  }
  return worst;
}

void criteria_7_8() {
  const double t0 = now_s();
  const ScenarioOutcome rigid = run_kind(ScenarioKind::kRrRigid, "acceptance_out/rr_rigid");
  const double wall_rigid = now_s() - t0;

  const RunSummary& s = rigid.res.summary;
  const double min_margin =
      std::min(s.robots[0].min_zmp_margin, s.robots[1].min_zmp_margin);
  const double period = s.robots[1].longitudinal_force.period;
  const double hook_dev = hook_distance_bound(rigid.trace);
  const bool completed = s.completed && rigid.res.leader_finished;
  const bool pass7 = completed && min_margin >= -0.005 && hook_dev <= 0.1 &&
                     std::abs(period - 1.06) / 1.06 <= 0.10 && wall_rigid < 300.0;
  report(7, pass7,
         fmt("completed %d, min margin %.4f m, hook dev %.3f m, period %.3f s, wall %.0f s",
             completed, min_margin, hook_dev, period, wall_rigid));

  const ScenarioOutcome rope = run_kind(ScenarioKind::kRrRope, "acceptance_out/rr_rope");
  const RunSummary& sr = rope.res.summary;
  const double ratio = sr.robots[1].longitudinal_force.peak_amplitude /
                       std::max(1e-9, s.robots[1].longitudinal_force.peak_amplitude);
  const bool pass8 = sr.completed && rope.res.leader_finished &&
                     sr.payload_min_clearance > 0.0 && ratio < 0.5;
  report(8, pass8,
         fmt("completed %d, min clearance %.3f m, spectral ratio %.3f", sr.completed,
             sr.payload_min_clearance, ratio));
}

// ---- criterion 9: guidance unit map -----------------------------------------

void criterion_9() {
  GuidanceParams p;
  bool pass = true;
  const double th[3] = {deg2rad(5), deg2rad(15), deg2rad(30)};
  const double v_expect[3] = {0.0, 0.1, 0.2};
  for (int i = 0; i < 3; ++i) {
    pass = pass && pitch_to_forward(th[i], p) == v_expect[i];
    pass = pass && pitch_to_forward(-th[i], p) == -v_expect[i];
  }
  const double ps[3] = {deg2rad(5), deg2rad(15), deg2rad(25)};
  const double w_expect[3] = {0.0, 0.3, 0.4};
  for (int i = 0; i < 3; ++i) {
    pass = pass && yaw_to_heading(ps[i], p) == w_expect[i];
    pass = pass && yaw_to_heading(-ps[i], p) == -w_expect[i];
  }

  SecondOrderFilter f(p.filter_omega, 1.0);
  double y = 0.0, prev = 0.0;
  bool monotone = true;
  for (int i = 0; i < 3000; ++i) {
    y = f.step(0.2, 0.004);
    if (y < prev - 1e-12 || y > 0.2 + 1e-12) monotone = false;
    prev = y;
  }
  pass = pass && monotone && std::abs(y - 0.2) < 1e-9;
  report(9, pass, fmt("nine zone cases exact; filter DC %.12f, overshoot-free %d", y, monotone));
}

// ---- criterion 10: determinism ----------------------------------------------

std::string file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void criterion_10() {
  ScenarioConfig cfg = default_config(ScenarioKind::kRrRigid);
  cfg.run.duration = 8.0;
  cfg.run.seed = 11;
  cfg.run.out_dir = "acceptance_out/det_a";
  const RunResult a = run_scenario(cfg);
  cfg.run.out_dir = "acceptance_out/det_b";
  const RunResult b = run_scenario(cfg);
  const std::string ba = file_bytes(a.trace_path);
  const bool pass = !ba.empty() && ba == file_bytes(b.trace_path);
  report(10, pass, fmt("two 8 s runs, traces %zu bytes, byte-identical %d", ba.size(), pass));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criteria_7_8();
  criterion_9();
  criterion_10();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d criterion(s) failed\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
