#include "pacc/gait.hpp"

namespace pacc {

GaitSchedule::GaitSchedule(const GaitParams& params) : params_(params) {}

LegPhase GaitSchedule::leg_phase(int leg, double t) const {
  LegPhase lp;
  const double period = cycle_period();
  const double u = t * params_.step_frequency - params_.phase_offsets[leg];
  const double n = std::floor(u);
  lp.phase = u - n;
  if (params_.duty_factor >= 1.0) {
    lp.stance = true;
    lp.liftoff_time = lp.touchdown_time = std::numeric_limits<double>::infinity();
    return lp;
  }
  if (lp.phase < params_.duty_factor) {
    lp.stance = true;
    lp.liftoff_time = (n + params_.duty_factor + params_.phase_offsets[leg]) * period;
    lp.touchdown_time = (n + 1.0 + params_.phase_offsets[leg]) * period;
  } else {
    lp.stance = false;
    lp.swing_phase = (lp.phase - params_.duty_factor) / (1.0 - params_.duty_factor);
    lp.liftoff_time = (n + params_.duty_factor + params_.phase_offsets[leg]) * period;
    lp.touchdown_time = (n + 1.0 + params_.phase_offsets[leg]) * period;
    lp.remaining_swing = lp.touchdown_time - t;
  }
  return lp;
}

std::array<bool, kNumLegs> GaitSchedule::contact_flags(double t) const {
  std::array<bool, kNumLegs> flags;
  for (int i = 0; i < kNumLegs; ++i) flags[i] = leg_phase(i, t).stance;
  return flags;
}

Eigen::Matrix<double, kNumLegs, Eigen::Dynamic> GaitSchedule::contact_sequence(double t, int steps,
                                                                               double dt) const {
  Eigen::Matrix<double, kNumLegs, Eigen::Dynamic> seq(kNumLegs, steps);
  for (int k = 0; k < steps; ++k) {
    const auto flags = contact_flags(t + k * dt);
    for (int i = 0; i < kNumLegs; ++i) seq(i, k) = flags[i] ? 1.0 : 0.0;
  }
  return seq;
}

Vec2 foothold_force_correction(const Vec3& f_ee_h, const Vec3& p_ee_h, double robot_mass,
                               double gravity) {
  const double den = robot_mass * gravity - f_ee_h.z();
  if (den <= 1e-6) {
    throw DegenerateLoad("end-effector load exceeds robot weight support");
  }
  return Vec2(f_ee_h.x() * p_ee_h.z() - f_ee_h.z() * p_ee_h.x(),
              f_ee_h.y() * p_ee_h.z() - f_ee_h.z() * p_ee_h.y()) /
         den;
}

Vec2 nominal_foothold_xy(int leg, const Vec2& v_des_xy_h, const Vec3& f_ee_h, const Vec3& p_ee_h,
                         double robot_mass, const GaitParams& params) {
  const Vec2 home = params.home_positions[leg].head<2>();
  const double stance_time = params.duty_factor / params.step_frequency;
  return home + 0.5 * stance_time * v_des_xy_h +
         foothold_force_correction(f_ee_h, p_ee_h, robot_mass);
}

double foothold_z(double liftoff_z, double v_z, const GaitParams& params) {
  return liftoff_z - params.duty_factor / params.step_frequency * v_z;
}

Vec3 world_foothold(const Vec3& p_nominal_h, const Vec3& r_com_w, const Mat3& r_horizontal_to_world,
                    const Vec3& v_des_h, double remaining_swing) {
  return r_horizontal_to_world * p_nominal_h + r_com_w +
         remaining_swing * (r_horizontal_to_world * v_des_h);
}

namespace {
inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }
}  // namespace

Vec3 swing_trajectory(const Vec3& p_liftoff, const Vec3& p_target, double phase,
                      double step_height) {
  const double ph = std::clamp(phase, 0.0, 1.0);
  Vec3 p = p_liftoff + (p_target - p_liftoff) * smoothstep(ph);
  const double apex = std::max(p_liftoff.z(), p_target.z()) + step_height;
  if (ph < 0.5) {
    p.z() = p_liftoff.z() + (apex - p_liftoff.z()) * smoothstep(ph / 0.5);
  } else {
    p.z() = apex + (p_target.z() - apex) * smoothstep((ph - 0.5) / 0.5);
  }
  return p;
}

void TerrainPlaneFit::reset(const std::array<Vec3, kNumLegs>& points) {
  points_ = points;
  have_points_ = true;
  refit();
}

void TerrainPlaneFit::add_touchdown(int leg, const Vec3& p_world) {
  points_[leg] = p_world;
  if (have_points_) refit();
}

void TerrainPlaneFit::refit() {
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Vec3 atz = Vec3::Zero();
  for (const auto& p : points_) {
    const Vec3 row(p.x(), p.y(), 1.0);
    ata += row * row.transpose();
    atz += row * p.z();
  }
  // keep the previous fit if the points are (near) collinear
  if (std::abs(ata.determinant()) < 1e-9) return;
  coeffs_ = ata.ldlt().solve(atz);
}

}  // namespace pacc
