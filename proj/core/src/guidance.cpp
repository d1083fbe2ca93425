#include "pacc/guidance.hpp"

namespace pacc {
namespace {

double level_map(double x, double edge1, double edge2, double lvl1, double lvl2) {
  const double mag = std::abs(x);
  if (mag < edge1) return 0.0;
  const double sgn = x >= 0.0 ? 1.0 : -1.0;
  return sgn * (mag < edge2 ? lvl1 : lvl2);
}

// Magnitude zone in {0,1,2} with hysteresis `h` applied when leaving a zone.
int classify_zone(double mag, double e1, double e2, double h, int prev) {
  switch (prev) {
    case 0: return mag >= e2 ? 2 : (mag >= e1 ? 1 : 0);
    case 1:
      if (mag >= e2) return 2;
      return mag < e1 - h ? 0 : 1;
    default:
      if (mag >= e2 - h) return 2;
      return mag < e1 - h ? 0 : 1;
  }
}

}  // namespace

double pitch_to_forward(double theta, const GuidanceParams& params) {
  return level_map(theta - params.theta_bias, params.theta1, params.theta2, params.v1, params.v2);
}

double yaw_to_heading(double psi, const GuidanceParams& params) {
  return level_map(psi, params.psi1, params.psi2, params.psidot1, params.psidot2);
}

double pendulum_pitch(const Vec3& link3_dir_world, const Vec3& plane_normal_world,
                      const Vec3& gravity_dir_world) {
  const Vec3 n = plane_normal_world.normalized();
  Vec3 g_proj = gravity_dir_world - gravity_dir_world.dot(n) * n;
  if (g_proj.norm() < 1e-9) return 0.0;
  g_proj.normalize();
  const Vec3 fwd = g_proj.cross(n);
  return std::atan2(link3_dir_world.dot(fwd), link3_dir_world.dot(g_proj));
}

double SecondOrderFilter::step(double input, double dt) {
  const double w = omega_, z = zeta_;
  Eigen::Matrix2d e;  // exp(A dt)
  if (std::abs(z - 1.0) < 1e-9) {
    const double l = -w;
    const double elt = std::exp(l * dt);
    Eigen::Matrix2d a;
    a << 0, 1, -w * w, -2 * z * w;
    e = elt * (Eigen::Matrix2d::Identity() + dt * (a - l * Eigen::Matrix2d::Identity()));
  } else if (z > 1.0) {
    const double s = w * std::sqrt(z * z - 1.0);
    const double l1 = -z * w + s, l2 = -z * w - s;
    Eigen::Matrix2d a;
    a << 0, 1, -w * w, -2 * z * w;
    e = (std::exp(l1 * dt) * (a - l2 * Eigen::Matrix2d::Identity()) -
         std::exp(l2 * dt) * (a - l1 * Eigen::Matrix2d::Identity())) /
        (l1 - l2);
  } else {
    const double wd = w * std::sqrt(1.0 - z * z);
    const double decay = std::exp(-z * w * dt);
    Eigen::Matrix2d a;
    a << 0, 1, -w * w, -2 * z * w;
    e = decay * (std::cos(wd * dt) * Eigen::Matrix2d::Identity() +
                 std::sin(wd * dt) / wd * (a + z * w * Eigen::Matrix2d::Identity()));
  }
  // s+ = E s + (I - E) e1 u  (A^-1 B = (-1, 0))
  const Eigen::Vector2d s(y_, yd_);
  const Eigen::Vector2d sn = e * s + (Eigen::Vector2d(1, 0) - e.col(0)) * input;
  y_ = sn.x();
  yd_ = sn.y();
  return y_;
}

Guidance::Guidance(const GuidanceParams& params)
    : params_(params),
      v_filter_(params.filter_omega, params.filter_zeta),
      yaw_filter_(params.filter_omega, params.filter_zeta) {}

VelocityCommand Guidance::update(double theta, double psi, double dt) {
  const double x = theta - params_.theta_bias;
  const int mag_pitch = classify_zone(std::abs(x), params_.theta1, params_.theta2,
                                      params_.hysteresis, std::abs(pitch_zone_));
  pitch_zone_ = (x >= 0.0 ? 1 : -1) * mag_pitch;
  const int mag_yaw =
      classify_zone(std::abs(psi), params_.psi1, params_.psi2, params_.hysteresis,
                    std::abs(yaw_zone_));
  yaw_zone_ = (psi >= 0.0 ? 1 : -1) * mag_yaw;

  const double levels_v[3] = {0.0, params_.v1, params_.v2};
  const double levels_w[3] = {0.0, params_.psidot1, params_.psidot2};
  command_.v_forward_raw = (pitch_zone_ >= 0 ? 1.0 : -1.0) * levels_v[mag_pitch];
  command_.yaw_rate_raw = (yaw_zone_ >= 0 ? 1.0 : -1.0) * levels_w[mag_yaw];
  command_.v_forward_filtered = v_filter_.step(command_.v_forward_raw, dt);
  command_.yaw_rate_filtered = yaw_filter_.step(command_.yaw_rate_raw, dt);
  return command_;
}

}  // namespace pacc
