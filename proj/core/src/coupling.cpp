#include "pacc/coupling.hpp"

namespace pacc {

Vec3 rope_force(const Vec3& hook_pos, const Vec3& payload_pos, const Vec3& hook_vel,
                const Vec3& payload_vel, double segment_length, double stiffness, double damping) {
  const Vec3 seg = payload_pos - hook_pos;
  const double len = seg.norm();
  if (len <= segment_length || len < 1e-9) return Vec3::Zero();
  const Vec3 dir = seg / len;
  const double rate = dir.dot(payload_vel - hook_vel);
  const double mag = std::max(0.0, stiffness * (len - segment_length) + damping * rate);
  return mag * dir;
}

BarForces rigid_bar_force(const Vec3& hook_a, const Vec3& hook_b, const Vec3& vel_a,
                          const Vec3& vel_b, const CouplingParams& params, double gravity) {
  BarForces out;
  const Vec3 seg = hook_b - hook_a;
  const double len = seg.norm();
  if (len < 1e-9) return out;
  const Vec3 dir = seg / len;
  const double rate = dir.dot(vel_b - vel_a);
  out.axial_force = params.bar_stiffness * (len - params.bar_length) + params.bar_damping * rate;
  out.on_hook_a = out.axial_force * dir;
  out.on_hook_b = -out.axial_force * dir;

  out.payload_pos = 0.5 * (hook_a + hook_b);
  out.payload_vel = 0.5 * (vel_a + vel_b);
  const Vec3 share(0.0, 0.0, -0.5 * params.payload_mass * gravity);
  out.on_hook_a += share;
  out.on_hook_b += share;
  return out;
}

}  // namespace pacc
