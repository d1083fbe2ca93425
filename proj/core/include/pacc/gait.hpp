#pragma once

#include <array>
#include <stdexcept>

#include "pacc/math_utils.hpp"

namespace pacc {

// Leg indexing used throughout.
enum Leg : int { kLF = 0, kRF = 1, kLH = 2, kRH = 3 };
inline constexpr int kNumLegs = 4;

struct DegenerateLoad : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GaitParams {
  double step_frequency = 0.5;  // Hz
  double duty_factor = 0.8;
  // Phase offsets of the crawl sequence LH -> LF -> RH -> RF.
  std::array<double, kNumLegs> phase_offsets{0.25, 0.75, 0.0, 0.5};
  std::array<Vec3, kNumLegs> home_positions{
      Vec3(0.24, 0.15, -0.35), Vec3(0.24, -0.15, -0.35),
      Vec3(-0.24, 0.15, -0.35), Vec3(-0.24, -0.15, -0.35)};
  double step_height = 0.10;  // m

  bool valid() const { return step_frequency > 0 && duty_factor > 0 && duty_factor <= 1; }
};

struct LegPhase {
  bool stance = true;
  double phase = 0.0;          // leg cycle phase in [0,1)
  double swing_phase = 0.0;    // normalized swing progress in [0,1), 0 in stance
  double remaining_swing = 0.0;  // s
  double liftoff_time = 0.0;   // most recent (or upcoming if in stance) lift-off
  double touchdown_time = 0.0; // next touch-down
};

// Periodic crawl schedule, deterministic in t.
class GaitSchedule {
 public:
  explicit GaitSchedule(const GaitParams& params = {});

  LegPhase leg_phase(int leg, double t) const;
  std::array<bool, kNumLegs> contact_flags(double t) const;
  // delta over an MPC horizon, sampled at interval starts.
  Eigen::Matrix<double, kNumLegs, Eigen::Dynamic> contact_sequence(double t, int steps,
                                                                   double dt) const;
  double cycle_period() const { return 1.0 / params_.step_frequency; }
  double swing_duration() const { return (1.0 - params_.duty_factor) * cycle_period(); }
  const GaitParams& params() const { return params_; }

 private:
  GaitParams params_;
};

// Eq.-style nominal foothold pieces. `f_ee` / `p_ee` are the end-effector
// force and position in the horizontal frame; p_ee.z() must be the hook height
// above the ground plane so the correction equals the static ZMP shift.
Vec2 foothold_force_correction(const Vec3& f_ee_h, const Vec3& p_ee_h, double robot_mass,
                               double gravity = kGravity);

Vec2 nominal_foothold_xy(int leg, const Vec2& v_des_xy_h, const Vec3& f_ee_h, const Vec3& p_ee_h,
                         double robot_mass, const GaitParams& params);

double foothold_z(double liftoff_z, double v_z, const GaitParams& params);

Vec3 world_foothold(const Vec3& p_nominal_h, const Vec3& r_com_w, const Mat3& r_horizontal_to_world,
                    const Vec3& v_des_h, double remaining_swing);

// Piecewise-cubic swing curve: xy smoothstep between the endpoints, z with a
// clearance apex of max(z0, z1) + step_height at mid-swing. C1 in phase with
// zero end velocities.
Vec3 swing_trajectory(const Vec3& p_liftoff, const Vec3& p_target, double phase,
                      double step_height);

// Least-squares plane z = a x + b y + c through recent touch-down points;
// used for the blind terrain-inclination estimate.
class TerrainPlaneFit {
 public:
  void reset(const std::array<Vec3, kNumLegs>& points);
  void add_touchdown(int leg, const Vec3& p_world);
  Vec2 gradient() const { return Vec2(coeffs_.x(), coeffs_.y()); }
  double height_at(const Vec2& xy) const { return coeffs_.x() * xy.x() + coeffs_.y() * xy.y() + coeffs_.z(); }

 private:
  void refit();
  std::array<Vec3, kNumLegs> points_{};
  bool have_points_ = false;
  Vec3 coeffs_ = Vec3::Zero();  // (a, b, c)
};

}  // namespace pacc
