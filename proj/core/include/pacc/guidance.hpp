#pragma once

#include "pacc/math_utils.hpp"

namespace pacc {

// Zone map from arm joint displacements to follower velocity commands.
// Neutral zone -> 0, first zone -> level 1, outer zone -> level 2, sign
// follows the displacement sign.
struct GuidanceParams {
  double theta1 = deg2rad(10.0);
  double theta2 = deg2rad(25.0);
  double psi1 = deg2rad(10.0);
  double psi2 = deg2rad(20.0);
  double v1 = 0.1;        // m/s
  double v2 = 0.2;        // m/s
  double psidot1 = 0.3;   // rad/s
  double psidot2 = 0.4;   // rad/s
  double theta_bias = 0.0;            // rad, rope mode shifts the pitch zones
  double hysteresis = deg2rad(1.0);   // rad, applied at every zone edge
  double filter_omega = 6.0;          // rad/s
  double filter_zeta = 1.0;

  bool valid() const {
    return theta1 > 0 && theta2 > theta1 && psi1 > 0 && psi2 > psi1 && v1 > 0 && v2 > v1 &&
           psidot1 > 0 && psidot2 > psidot1 && hysteresis >= 0 && filter_omega > 0 &&
           filter_zeta > 0;
  }
};

struct VelocityCommand {
  double v_forward_raw = 0.0;
  double v_forward_filtered = 0.0;
  double yaw_rate_raw = 0.0;
  double yaw_rate_filtered = 0.0;
};

// Stateless level maps (no hysteresis).
double pitch_to_forward(double theta, const GuidanceParams& params);
double yaw_to_heading(double psi, const GuidanceParams& params);

// Signed pendulum angle of the third link w.r.t. gravity, measured in the
// pendulum plane. Positive when the hook is deflected toward the arm's
// forward direction.
double pendulum_pitch(const Vec3& link3_dir_world, const Vec3& plane_normal_world,
                      const Vec3& gravity_dir_world);

// Exact ZOH discretization of y'' = w^2 (u - y) - 2 z w y'. DC gain is exactly
// one; for zeta >= 1 the step response is overshoot-free at any rate.
class SecondOrderFilter {
 public:
  SecondOrderFilter() = default;
  SecondOrderFilter(double omega, double zeta) : omega_(omega), zeta_(zeta) {}

  double step(double input, double dt);
  void reset(double value = 0.0) { y_ = value; yd_ = 0.0; }
  double value() const { return y_; }

 private:
  double omega_ = 6.0;
  double zeta_ = 1.0;
  double y_ = 0.0;
  double yd_ = 0.0;
};

// Per-robot guidance: zone maps with edge hysteresis plus command filters.
class Guidance {
 public:
  explicit Guidance(const GuidanceParams& params = {});

  VelocityCommand update(double theta, double psi, double dt);
  const VelocityCommand& command() const { return command_; }

 private:
  GuidanceParams params_;
  int pitch_zone_ = 0;  // signed zone index in {-2..2}
  int yaw_zone_ = 0;
  SecondOrderFilter v_filter_;
  SecondOrderFilter yaw_filter_;
  VelocityCommand command_;
};

}  // namespace pacc
