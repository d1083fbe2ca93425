#pragma once

#include <stdexcept>
#include <vector>

#include "pacc/arm.hpp"
#include "pacc/coupling.hpp"
#include "pacc/gait.hpp"
#include "pacc/guidance.hpp"
#include "pacc/leader.hpp"
#include "pacc/mpc.hpp"
#include "pacc/terrain.hpp"

namespace pacc {

struct NumericalDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RobotRole { kLeader, kFollower };

struct RobotConfig {
  ArmParams arm;
  GuidanceParams guidance;
  GaitParams gait;
  MpcConfig mpc;
  Vec3 arm_mount{0.30, 0.0, 0.05};  // base frame, trunk top
  double arm_mount_yaw = 0.0;       // pi when the arm faces backwards
  double desired_height = 0.35;
  double start_x = 0.0;
  double start_y = 0.0;
  double start_yaw = 0.0;
};

struct SimRates {
  double dt_physics = 1e-3;
  double guidance_hz = 250.0;
  double mpc_hz = 25.0;
  bool valid() const {
    return dt_physics > 0 && dt_physics <= 2e-3 && guidance_hz > 0 && mpc_hz > 0;
  }
};

// One robot's full closed-loop stack plus its simulation state.
struct RobotRuntime {
  RobotRuntime(const RobotConfig& config, RobotRole role);

  RobotConfig cfg;
  RobotRole role;
  Mat3 r_mount;  // base -> arm mount rotation

  RobotState state;  // base pose/twist, feet (world), estimated disturbance
  ArmState arm;

  std::array<bool, kNumLegs> stance{true, true, true, true};
  std::array<Vec3, kNumLegs> foot_liftoff{};
  std::array<Vec3, kNumLegs> foot_target{};
  std::array<Vec2, kNumLegs> delta_pa{};        // frozen at lift-off
  std::array<Vec3, kNumLegs> mpc_foot_offset{}; // optimizer's foothold correction

  GaitSchedule gait;
  Guidance guidance;
  ForceEstimator estimator;
  SrbdMpc mpc;
  TerrainPlaneFit plane;

  VelocityCommand command;
  EeWrenchEstimate wrench;
  bool wrench_valid = false;
  Vec3 f_ee_arm = Vec3::Zero();  // latest estimate, arm frame
  Vec3 kbar = Vec3::Zero();
  MpcSolution last_mpc;
  bool has_mpc = false;

  Vec3 hook_force_world = Vec3::Zero();
  Vec3 hook_point_world = Vec3::Zero();  // where the coupling force acts
  Vec3 rddot_realized = Vec3::Zero();

  Mat3 r_base() const { return euler_zyx_to_rot(state.euler); }
  Mat3 r_arm_to_world() const { return r_base() * r_mount; }
  ArmFrames fk() const { return forward_kinematics(cfg.arm, arm.q); }
  Vec3 hook_world() const;
  Vec3 hook_velocity_world() const;
  Vec3 hook_base() const;  // end effector in the base frame
};

struct WorldParams {
  SimRates rates;
  Terrain terrain;
  CouplingParams coupling;
  RobotConfig leader;
  RobotConfig follower;
  bool human_leader = false;
  WaypointPath leader_path;
  double hand_height = 0.45;        // human mode: hook carry height
  double hand_filter_omega = 4.0;   // rad/s, arm-stabilization low-pass
};

// Deterministic fixed-step harness: two coupled robots (or hand + robot),
// passive arms, payload coupling, scripted leader.
class World {
 public:
  explicit World(const WorldParams& params);

  void step();
  void run_for(double duration);
  double time() const { return static_cast<double>(step_count_) * params_.rates.dt_physics; }

  int num_robots() const { return static_cast<int>(robots_.size()); }
  const RobotRuntime& robot(int i) const { return robots_[i]; }
  RobotRuntime& robot(int i) { return robots_[i]; }
  // follower is always the last robot
  const RobotRuntime& follower() const { return robots_.back(); }
  RobotRuntime& follower() { return robots_.back(); }

  Vec3 payload_position() const { return payload_pos_; }
  Vec3 payload_velocity() const { return payload_vel_; }
  double payload_clearance() const;
  Vec3 hand_position() const { return hand_pos_; }
  bool leader_finished() const { return leader_path_.sample(time()).finished; }
  const WorldParams& params() const { return params_; }

  struct ZmpDiag {
    Vec2 zmp = Vec2::Zero();
    double margin = 0.0;
  };
  ZmpDiag zmp_diag(int robot_idx) const;

 private:
  void guidance_tick(RobotRuntime& r);
  void mpc_tick(RobotRuntime& r);
  void gait_transitions(RobotRuntime& r);
  Vec3 foot_target_estimate(RobotRuntime& r, int leg, bool at_liftoff);
  void compute_coupling();
  void integrate_robot(RobotRuntime& r);
  void integrate_payload_and_hand();
  void check_divergence() const;

  WorldParams params_;
  std::vector<RobotRuntime> robots_;
  WaypointPath leader_path_;

  Vec3 payload_pos_ = Vec3::Zero();
  Vec3 payload_vel_ = Vec3::Zero();
  Vec3 payload_force_ = Vec3::Zero();  // rope mode: net coupling force on payload

  Vec3 hand_pos_ = Vec3::Zero();
  Vec3 hand_vel_ = Vec3::Zero();
  std::array<SecondOrderFilter, 3> hand_filter_;

  long step_count_ = 0;
  int stride_guidance_ = 4;
  int stride_mpc_ = 40;
};

}  // namespace pacc
