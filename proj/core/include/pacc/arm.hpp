#pragma once

#include <optional>

#include "pacc/math_utils.hpp"

namespace pacc {

// 3-DoF passive arm, yaw-pitch-pitch. The chain A-B-C-D-E is rigid between
// joints: segment AB is bolted to the robot, the yaw joint sits at B, the two
// pitch joints at C and D. Link 3 (D-E) is the pendulum link carrying the hook.
enum class SpringMode { kAntagonistic, kAsymmetric };

struct ArmParams {
  // Segment lengths [m] and interior bend angles [rad] of the zero pose.
  double len_ab = 0.082;
  double len_bc = 0.056;
  double len_cd = 0.271;
  double len_de = 0.277;
  double ang_abc = deg2rad(117.6);
  double ang_bcd = deg2rad(164.7);
  double ang_cde = deg2rad(51.6);

  // base, link1, link2, link3 [kg]; base mass is carried by the robot, the
  // three moving links are modeled as uniform thin rods.
  Vec4 link_masses{0.366, 0.162, 0.497, 0.258};

  Vec3 joint_stiffness{3.5, 8.47, 2.75};   // N·m/rad
  Vec3 joint_damping{0.26, 1.43, 0.0};     // N·m·s/rad, joint 3 undamped
  Vec3 spring_equilibrium = Vec3::Zero();  // q_a0 [rad]

  SpringMode third_joint_mode = SpringMode::kAntagonistic;
  double third_joint_pretorque = 0.0;  // constant offset on joint 3 in asymmetric mode [N·m]

  Vec3 joint_lower{-M_PI / 2, -M_PI / 2, -M_PI / 2};
  Vec3 joint_upper{M_PI / 2, M_PI / 2, M_PI / 2};

  double gravity = kGravity;
  double singularity_tol = 1e-6;  // |det J| threshold

  bool valid() const;
};

struct ArmState {
  Vec3 q = Vec3::Zero();
  Vec3 qd = Vec3::Zero();
};

// Joint positions and link orientations in the arm base frame (x forward,
// z up, origin at mounting point A).
struct ArmFrames {
  Vec3 p_a, p_b, p_c, p_d, p_e;
  Mat3 r_link1, r_link2, r_link3;
  Vec3 link3_dir() const { return (p_e - p_d).normalized(); }
};

struct EeWrenchEstimate {
  Vec3 f_ee_hat = Vec3::Zero();   // arm/base frame [N]
  Vec3 f_ext = Vec3::Zero();      // world frame [N]
  Vec3 tau_ext = Vec3::Zero();    // world frame [N·m]
  Vec3 p_ee_base = Vec3::Zero();  // end-effector in robot base frame [m]
};

ArmFrames forward_kinematics(const ArmParams& params, const Vec3& q);

// Linear-velocity Jacobian of the hook (point E), arm base frame.
Mat3 ee_jacobian(const ArmParams& params, const Vec3& q);

bool jacobian_singular(const ArmParams& params, const Mat3& jac);

// Generalized gravity torque tau_g = -dU/dq. `gravity_dir` is the gravity
// acceleration vector expressed in the arm base frame, (0,0,-g) for a level base.
Vec3 gravity_torque(const ArmParams& params, const Vec3& q, const Vec3& gravity_dir);

Vec3 spring_torque(const ArmParams& params, const Vec3& q);
Vec3 damping_torque(const ArmParams& params, const Vec3& qd);

struct ForceEstimateResult {
  Vec3 f_ee = Vec3::Zero();  // arm base frame
  double det_jacobian = 0.0;
  bool singular = false;
};

// Quasi-static estimate f_ee = -(J^T)^-1 (tau_g + tau_s + tau_d).
ForceEstimateResult estimate_ee_force(const ArmParams& params, const ArmState& state,
                                      const Vec3& gravity_dir);

// Equivalent force/torque at the robot CoM, world frame. Inputs are given in
// the robot base frame (mount transform already applied by the caller).
EeWrenchEstimate wrench_at_com(const Vec3& f_ee_base, const Mat3& r_base_to_world,
                               const Vec3& p_ee_base);

Mat3 mass_matrix(const ArmParams& params, const Vec3& q);

// Inverse dynamics: joint torque for motion (q, qd, qdd) under gravity,
// without springs/dampers/external forces.
Vec3 inverse_dynamics(const ArmParams& params, const Vec3& q, const Vec3& qd, const Vec3& qdd,
                      const Vec3& gravity_dir);

// Full passive dynamics: M qdd + V = tau_g + tau_s + tau_d + J^T f_ee.
Vec3 forward_dynamics(const ArmParams& params, const ArmState& state, const Vec3& f_ee_applied,
                      const Vec3& gravity_dir);

// Kinetic + gravitational + spring potential energy (zero at q = 0 chain pose).
double total_energy(const ArmParams& params, const ArmState& state, const Vec3& gravity_dir);

// Diagonal of the task-space stiffness (J^T R_wb)^-1 k_s (R_bw J)^-1, world axes.
// Empty when the Jacobian is singular.
std::optional<Vec3> cartesian_stiffness_diag(const ArmParams& params, const Vec3& q,
                                             const Mat3& r_base_to_world);

// Wraps the quasi-static estimator with the hold-on-singularity policy:
// near a singular configuration the previous output is reused for up to
// `hold_limit` seconds, after which the estimate is flagged failed.
class ForceEstimator {
 public:
  explicit ForceEstimator(double hold_limit = 0.2) : hold_limit_(hold_limit) {}

  struct Output {
    Vec3 f_ee = Vec3::Zero();
    Vec3 kbar_diag = Vec3::Zero();
    bool valid = false;
    bool held = false;
  };

  Output update(const ArmParams& params, const ArmState& state, const Vec3& gravity_dir,
                const Mat3& r_arm_to_world, double t);

 private:
  double hold_limit_;
  double last_valid_time_ = -1.0;
  bool has_estimate_ = false;
  Output last_;
};

}  // namespace pacc
