#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace pacc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kGravity = 9.81;  // m/s^2

inline constexpr double deg2rad(double deg) { return deg * M_PI / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / M_PI; }

inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

inline Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

inline Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

inline Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

// ZYX Euler convention. euler = (roll, pitch, yaw), R = Rz(yaw) Ry(pitch) Rx(roll).
inline Mat3 euler_zyx_to_rot(const Vec3& euler) {
  return rot_z(euler.z()) * rot_y(euler.y()) * rot_x(euler.x());
}

// Maps base-frame angular velocity to ZYX Euler-angle rates. Singular at pitch +-pi/2.
inline Mat3 euler_rate_matrix(const Vec3& euler) {
  const double sp = std::sin(euler.x()), cp = std::cos(euler.x());
  const double ct = std::cos(euler.y()), tt = std::tan(euler.y());
  Mat3 w;
  w << 1, sp * tt, cp * tt,
       0, cp, -sp,
       0, sp / ct, cp / ct;
  return w;
}

// d/d(euler_j) of euler_rate_matrix(euler) * omega, columns j = roll, pitch (yaw column zero).
inline Mat3 euler_rate_jacobian_wrt_euler(const Vec3& euler, const Vec3& omega) {
  const double sp = std::sin(euler.x()), cp = std::cos(euler.x());
  const double ct = std::cos(euler.y()), st = std::sin(euler.y());
  const double tt = st / ct;
  Mat3 j = Mat3::Zero();
  j(0, 0) = cp * tt * omega.y() - sp * tt * omega.z();
  j(1, 0) = -sp * omega.y() - cp * omega.z();
  j(2, 0) = (cp * omega.y() - sp * omega.z()) / ct;
  j(0, 1) = (sp * omega.y() + cp * omega.z()) / (ct * ct);
  j(2, 1) = (sp * omega.y() + cp * omega.z()) * st / (ct * ct);
  return j;
}

// dR/d(euler_j) for R = Rz Ry Rx.
inline Mat3 rot_derivative_wrt_euler(const Vec3& euler, int j) {
  const Mat3 r = euler_zyx_to_rot(euler);
  switch (j) {
    case 0: return r * skew(Vec3::UnitX());
    case 1:
      return rot_z(euler.z()) * rot_y(euler.y()) * skew(Vec3::UnitY()) * rot_x(euler.x());
    default: return skew(Vec3::UnitZ()) * r;
  }
}

// SplitMix64; used for seed-stable procedural terrain.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1], bit-stable across platforms.
inline double hash_noise(std::uint64_t seed, std::int64_t i, std::int64_t j) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i) * 0x9e3779b97f4a7c15ULL) ^
                               splitmix64(static_cast<std::uint64_t>(j) + 0x7f4a7c159e3779b9ULL));
  return 2.0 * (static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0)) - 1.0;
}

}  // namespace pacc
