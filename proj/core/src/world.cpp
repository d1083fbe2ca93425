#include "pacc/world.hpp"

#include <cmath>

namespace pacc {

RobotRuntime::RobotRuntime(const RobotConfig& config, RobotRole role_in)
    : cfg(config),
      role(role_in),
      r_mount(rot_z(config.arm_mount_yaw)),
      gait(config.gait),
      guidance(config.guidance),
      mpc(config.mpc) {}

Vec3 RobotRuntime::hook_base() const { return cfg.arm_mount + r_mount * fk().p_e; }

Vec3 RobotRuntime::hook_world() const { return state.r + r_base() * hook_base(); }

Vec3 RobotRuntime::hook_velocity_world() const {
  const Mat3 rb = r_base();
  const Vec3 arm_vel = r_mount * (ee_jacobian(cfg.arm, arm.q) * arm.qd);
  return state.rdot + rb * state.omega.cross(hook_base()) + rb * arm_vel;
}

World::World(const WorldParams& params) : params_(params), leader_path_(params.leader_path) {
  const double dt = params_.rates.dt_physics;
  stride_guidance_ = std::max(1, static_cast<int>(std::lround(1.0 / (dt * params_.rates.guidance_hz))));
  stride_mpc_ = std::max(1, static_cast<int>(std::lround(1.0 / (dt * params_.rates.mpc_hz))));

  if (!params_.human_leader) robots_.emplace_back(params_.leader, RobotRole::kLeader);
  robots_.emplace_back(params_.follower, RobotRole::kFollower);

  for (auto& r : robots_) {
    const double gz = params_.terrain.height(r.cfg.start_x, r.cfg.start_y);
    r.state.euler = Vec3(0.0, 0.0, r.cfg.start_yaw);
    r.state.r = Vec3(r.cfg.start_x, r.cfg.start_y, gz + r.cfg.desired_height);
    const Mat3 rz = rot_z(r.cfg.start_yaw);
    std::array<Vec3, kNumLegs> feet;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      Vec3 p = r.state.r + rz * r.cfg.gait.home_positions[leg];
      p.z() = params_.terrain.height(p.x(), p.y());
      feet[leg] = p;
      r.state.feet[leg] = p;
      r.foot_target[leg] = p;
      r.foot_liftoff[leg] = p;
    }
    r.plane.reset(feet);
  }

  const auto s0 = leader_path_.sample(0.0);
  hand_pos_ = Vec3(s0.position.x(), s0.position.y(), params_.hand_height);
  for (int i = 0; i < 3; ++i) {
    hand_filter_[i] = SecondOrderFilter(params_.hand_filter_omega, 1.0);
    hand_filter_[i].reset(hand_pos_[i]);
  }

  const Vec3 hook_f = follower().hook_world();
  const Vec3 hook_l = params_.human_leader ? hand_pos_ : robots_[0].hook_world();
  const Vec3 mid = 0.5 * (hook_f + hook_l);
  if (params_.coupling.kind == CouplingKind::kRope) {
    const double gap = (hook_f - hook_l).norm();
    const double seg = params_.coupling.rope_segment_length;
    const double half = 0.5 * gap;
    const double depth = half < seg ? std::sqrt(seg * seg - half * half) : 0.0;
    payload_pos_ = mid - Vec3(0.0, 0.0, depth);
  } else {
    payload_pos_ = mid;
  }
}

void World::run_for(double duration) {
  const long steps = std::lround(duration / params_.rates.dt_physics);
  for (long i = 0; i < steps; ++i) step();
}

double World::payload_clearance() const {
  return payload_pos_.z() - params_.terrain.height(payload_pos_.x(), payload_pos_.y());
}

World::ZmpDiag World::zmp_diag(int robot_idx) const {
  const RobotRuntime& r = robots_[robot_idx];
  ZmpDiag d;
  const double ground_z = r.plane.height_at(r.state.r.head<2>());
  try {
    d.zmp = zmp_point(r.state.r, r.rddot_realized, r.hook_world(),
                      r.state.disturbance.head<3>(), r.cfg.mpc.mass, r.cfg.mpc.gravity, ground_z);
    d.margin = support_polygon(r.state.feet, r.stance, r.cfg.mpc.zmp_margin).margin_of(d.zmp);
  } catch (const std::runtime_error&) {
    d.zmp = r.state.r.head<2>();
    d.margin = 0.0;
  }
  return d;
}

Vec3 World::foot_target_estimate(RobotRuntime& r, int leg, bool at_liftoff) {
  const double t = time();
  const LegPhase ph = r.gait.leg_phase(leg, t);
  const double dt_sw = ph.stance ? r.gait.swing_duration() : ph.remaining_swing;
  const double yaw = r.state.euler.z();
  const Mat3 rz = rot_z(yaw);
  const Vec2 heading(std::cos(yaw), std::sin(yaw));
  const double v_cmd = r.command.v_forward_filtered;
  const double v_z = v_cmd * r.plane.gradient().dot(heading);  // signed positive uphill
  const Vec3 v_f_h(v_cmd, 0.0, v_z);

  if (at_liftoff) {
    const double ground_z = r.plane.height_at(r.state.r.head<2>());
    const Vec3 hook_w = r.hook_world();
    Vec3 p_ee_h = rz.transpose() * (hook_w - r.state.r);
    p_ee_h.z() = hook_w.z() - ground_z;
    const Vec3 f_ee_h = rz.transpose() * Vec3(r.state.disturbance.head<3>());
    try {
      r.delta_pa[leg] =
          foothold_force_correction(f_ee_h, p_ee_h, r.cfg.mpc.mass, r.cfg.mpc.gravity);
    } catch (const DegenerateLoad&) {
      r.delta_pa[leg].setZero();
    }
  }

  const double stance_time = r.cfg.gait.duty_factor / r.cfg.gait.step_frequency;
  const Vec2 xy = Vec2(r.cfg.gait.home_positions[leg].head<2>()) +
                  0.5 * stance_time * Vec2(v_cmd, 0.0) + r.delta_pa[leg];
  const double liftoff_z =
      (ph.stance ? r.state.feet[leg].z() : r.foot_liftoff[leg].z()) - r.state.r.z();
  const Vec3 p_n_h(xy.x(), xy.y(), foothold_z(liftoff_z, v_z, r.cfg.gait));
  return world_foothold(p_n_h, r.state.r, rz, v_f_h, dt_sw);
}

void World::gait_transitions(RobotRuntime& r) {
  const auto flags = r.gait.contact_flags(time());
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (r.stance[leg] && !flags[leg]) {
      r.stance[leg] = false;
      r.foot_liftoff[leg] = r.state.feet[leg];
      r.mpc_foot_offset[leg].setZero();
      r.foot_target[leg] = foot_target_estimate(r, leg, true);
    } else if (!r.stance[leg] && flags[leg]) {
      r.stance[leg] = true;
      Vec3 p = r.foot_target[leg] + r.mpc_foot_offset[leg];
      p.z() = params_.terrain.height(p.x(), p.y());
      r.state.feet[leg] = p;
      r.plane.add_touchdown(leg, p);
    }
  }
}

void World::guidance_tick(RobotRuntime& r) {
  const double t = time();
  const double dt = stride_guidance_ * params_.rates.dt_physics;
  const Mat3 r_aw = r.r_arm_to_world();
  const Vec3 gravity_arm = r_aw.transpose() * Vec3(0.0, 0.0, -r.cfg.arm.gravity);
  const auto est = r.estimator.update(r.cfg.arm, r.arm, gravity_arm, r_aw, t);
  if (est.valid) {
    r.kbar = est.kbar_diag;
    r.f_ee_arm = est.f_ee;
    const Vec3 f_base = r.r_mount * est.f_ee;
    r.wrench = wrench_at_com(f_base, r.r_base(), r.hook_base());
    r.state.disturbance.head<3>() = r.wrench.f_ext;
    r.state.disturbance.tail<3>() = r.wrench.tau_ext;
    r.wrench_valid = true;
  }

  if (r.role == RobotRole::kFollower) {
    const ArmFrames frames = r.fk();
    const Vec3 link3_w = r_aw * frames.link3_dir();
    const Vec3 plane_normal_w = r_aw * (rot_z(r.arm.q.x()) * Vec3::UnitY());
    const double theta = pendulum_pitch(link3_w, plane_normal_w, Vec3(0.0, 0.0, -1.0));
    r.command = r.guidance.update(theta, r.arm.q.x(), dt);
  } else {
    // scripted operator commands; the profile is already smooth
    const auto s = leader_path_.sample(t);
    const double desired_yaw = std::atan2(s.heading.y(), s.heading.x());
    const double err = wrap_angle(desired_yaw - r.state.euler.z());
    r.command.v_forward_raw = s.speed;
    r.command.v_forward_filtered = s.speed;
    r.command.yaw_rate_raw = std::clamp(1.5 * err, -0.4, 0.4);
    r.command.yaw_rate_filtered = r.command.yaw_rate_raw;
  }

  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (!r.stance[leg]) r.foot_target[leg] = foot_target_estimate(r, leg, false);
  }
}

void World::mpc_tick(RobotRuntime& r) {
  const double t = time();
  MpcInputs in;
  in.x0 = r.state.pack();
  // sample each model interval past its midpoint: gait events between MPC
  // ticks are anticipated rather than discovered late, and the sample point
  // stays off the event grid (events land on multiples of the tick period)
  in.contact = r.gait.contact_sequence(t + 0.6 * r.cfg.mpc.dt, r.cfg.mpc.horizon, r.cfg.mpc.dt);
  for (int leg = 0; leg < kNumLegs; ++leg) in.contact_now[leg] = r.stance[leg] ? 1.0 : 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    in.foot_targets[leg] =
        r.stance[leg] ? foot_target_estimate(r, leg, false) : r.foot_target[leg];
  }
  in.kbar = r.kbar;
  in.p_ee_hat = r.hook_world();
  in.delta_er_sq = (in.p_ee_hat - r.state.r).squaredNorm();
  in.ground_z = r.plane.height_at(r.state.r.head<2>());

  TerrainPlaneRef plane_ref;
  plane_ref.gradient = r.plane.gradient();
  plane_ref.offset = r.plane.height_at(Vec2::Zero());
  in.x_ref = build_reference(r.command.v_forward_filtered, r.command.yaw_rate_filtered, r.state,
                             r.cfg.desired_height, plane_ref, r.cfg.mpc);

  r.last_mpc = r.mpc.solve(in);
  r.has_mpc = true;

  // optimizer's foothold correction for the leg in flight
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (r.stance[leg]) continue;
    for (int k = 1; k < in.contact.cols(); ++k) {
      if (in.contact(leg, k) > 0.0 && in.contact(leg, k - 1) <= 0.0) {
        const Vec3 landing = r.last_mpc.x_pred.col(k).segment<3>(kIdxFeet + 3 * leg);
        Vec3 off = landing - r.foot_target[leg];
        const double lim = 0.1;
        if (off.norm() > lim) off *= lim / off.norm();
        r.mpc_foot_offset[leg] = off;
        break;
      }
    }
  }
}

void World::compute_coupling() {
  for (auto& r : robots_) {
    r.hook_force_world.setZero();
    r.hook_point_world = r.hook_world();
  }
  if (params_.coupling.kind == CouplingKind::kNone) return;

  RobotRuntime& fol = follower();
  const Vec3 hook_f = fol.hook_point_world;
  const Vec3 vel_f = fol.hook_velocity_world();
  Vec3 hook_l, vel_l;
  if (params_.human_leader) {
    hook_l = hand_pos_;
    vel_l = hand_vel_;
  } else {
    hook_l = robots_[0].hook_point_world;
    vel_l = robots_[0].hook_velocity_world();
  }

  if (params_.coupling.kind == CouplingKind::kRigidBar) {
    const BarForces bf = rigid_bar_force(hook_l, hook_f, vel_l, vel_f, params_.coupling, kGravity);
    if (!params_.human_leader) robots_[0].hook_force_world = bf.on_hook_a;
    fol.hook_force_world = bf.on_hook_b;
    payload_pos_ = bf.payload_pos;
    payload_vel_ = bf.payload_vel;
  } else {
    const auto& c = params_.coupling;
    const Vec3 f_on_l = rope_force(hook_l, payload_pos_, vel_l, payload_vel_,
                                   c.rope_segment_length, c.rope_stiffness, c.rope_damping);
    const Vec3 f_on_f = rope_force(hook_f, payload_pos_, vel_f, payload_vel_,
                                   c.rope_segment_length, c.rope_stiffness, c.rope_damping);
    if (!params_.human_leader) robots_[0].hook_force_world = f_on_l;
    fol.hook_force_world = f_on_f;
    payload_force_ = -f_on_l - f_on_f;
  }
}

void World::integrate_robot(RobotRuntime& r) {
  const double dt = params_.rates.dt_physics;
  const double t_new = time() + dt;

  // passive arm, semi-implicit Euler
  const Mat3 r_aw = r.r_arm_to_world();
  const Vec3 f_arm = r_aw.transpose() * r.hook_force_world;
  const Vec3 g_arm = r_aw.transpose() * Vec3(0.0, 0.0, -r.cfg.arm.gravity);
  const Vec3 qdd = forward_dynamics(r.cfg.arm, r.arm, f_arm, g_arm);
  r.arm.qd += dt * qdd;
  r.arm.q += dt * r.arm.qd;
  for (int i = 0; i < 3; ++i) {
    if (r.arm.q[i] < r.cfg.arm.joint_lower[i]) {
      r.arm.q[i] = r.cfg.arm.joint_lower[i];
      r.arm.qd[i] = std::max(0.0, r.arm.qd[i]);
    } else if (r.arm.q[i] > r.cfg.arm.joint_upper[i]) {
      r.arm.q[i] = r.cfg.arm.joint_upper[i];
      r.arm.qd[i] = std::min(0.0, r.arm.qd[i]);
    }
  }

  // base under commanded GRFs and the coupling force
  const double m = r.cfg.mpc.mass;
  Vec3 force = m * Vec3(0.0, 0.0, -r.cfg.mpc.gravity) + r.hook_force_world;
  Vec3 moment_w = (r.hook_point_world - r.state.r).cross(r.hook_force_world);
  if (r.has_mpc) {
    const InputVec u0 = r.last_mpc.u0();
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (!r.stance[leg]) continue;
      const Vec3 f = u0.segment<3>(3 * leg);
      force += f;
      moment_w += (r.state.feet[leg] - r.state.r).cross(f);
    }
  }
  const Mat3 inertia = r.cfg.mpc.inertia_diag.asDiagonal();
  const Vec3 omega_dot =
      inertia.inverse() *
      (-r.state.omega.cross(inertia * r.state.omega) + r.r_base().transpose() * moment_w);
  r.rddot_realized = force / m;
  r.state.rdot += dt * r.rddot_realized;
  r.state.r += dt * r.state.rdot;
  r.state.omega += dt * omega_dot;
  r.state.euler += dt * (euler_rate_matrix(r.state.euler) * r.state.omega);
  r.state.euler.z() = wrap_angle(r.state.euler.z());

  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (r.stance[leg]) continue;  // stance feet are world anchors
    const LegPhase ph = r.gait.leg_phase(leg, t_new);
    const double phase = ph.stance ? 1.0 : ph.swing_phase;
    r.state.feet[leg] = swing_trajectory(r.foot_liftoff[leg],
                                         r.foot_target[leg] + r.mpc_foot_offset[leg], phase,
                                         r.cfg.gait.step_height);
  }
}

void World::integrate_payload_and_hand() {
  const double dt = params_.rates.dt_physics;
  if (params_.coupling.kind == CouplingKind::kRope) {
    payload_vel_ += dt * (Vec3(0.0, 0.0, -kGravity) +
                          payload_force_ / params_.coupling.payload_mass);
    payload_pos_ += dt * payload_vel_;
  }
  if (params_.human_leader) {
    const double t_new = time() + dt;
    const auto s = leader_path_.sample(t_new);
    const Vec3 target(s.position.x(), s.position.y(), params_.hand_height);
    Vec3 hand_new;
    for (int i = 0; i < 3; ++i) hand_new[i] = hand_filter_[i].step(target[i], dt);
    hand_vel_ = (hand_new - hand_pos_) / dt;
    hand_pos_ = hand_new;
  }
}

void World::check_divergence() const {
  for (const auto& r : robots_) {
    if (!r.state.r.allFinite() || r.state.r.norm() > 100.0) {
      throw NumericalDivergence("robot base state out of bounds at t=" + std::to_string(time()));
    }
    if (!r.arm.qd.allFinite() || r.arm.qd.cwiseAbs().maxCoeff() > 100.0) {
      throw NumericalDivergence("arm joint rates out of bounds at t=" + std::to_string(time()));
    }
  }
  if (!payload_pos_.allFinite()) {
    throw NumericalDivergence("payload state not finite at t=" + std::to_string(time()));
  }
}

void World::step() {
  for (auto& r : robots_) gait_transitions(r);
  if (step_count_ % stride_guidance_ == 0) {
    for (auto& r : robots_) guidance_tick(r);
  }
  if (step_count_ % stride_mpc_ == 0) {
    for (auto& r : robots_) mpc_tick(r);
  }
  compute_coupling();
  for (auto& r : robots_) integrate_robot(r);
  integrate_payload_and_hand();
  ++step_count_;
  check_divergence();
}

}  // namespace pacc
