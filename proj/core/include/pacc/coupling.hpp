#pragma once

#include "pacc/math_utils.hpp"

namespace pacc {

enum class CouplingKind { kNone, kRigidBar, kRope };

struct CouplingParams {
  CouplingKind kind = CouplingKind::kRigidBar;
  double payload_mass = 7.0;  // kg

  double bar_length = 1.0;       // m, hook to hook
  double bar_stiffness = 1e4;    // N/m
  double bar_damping = 50.0;     // N s/m

  double rope_segment_length = 0.3;  // m per side
  double rope_stiffness = 2e3;
  double rope_damping = 10.0;
};

// Tension-only segment force, applied at the hook (directed toward the
// payload when taut, zero when slack). The payload sees the opposite.
Vec3 rope_force(const Vec3& hook_pos, const Vec3& payload_pos, const Vec3& hook_vel,
                const Vec3& payload_vel, double segment_length, double stiffness, double damping);

struct BarForces {
  Vec3 on_hook_a = Vec3::Zero();
  Vec3 on_hook_b = Vec3::Zero();
  Vec3 payload_pos = Vec3::Zero();
  Vec3 payload_vel = Vec3::Zero();
  double axial_force = 0.0;  // >0 tension
};

// Stiff bilateral spring-damper on the hook-to-hook distance; the payload is
// lumped at the bar midpoint and its weight is split evenly between the hooks.
BarForces rigid_bar_force(const Vec3& hook_a, const Vec3& hook_b, const Vec3& vel_a,
                          const Vec3& vel_b, const CouplingParams& params,
                          double gravity = kGravity);

}  // namespace pacc
