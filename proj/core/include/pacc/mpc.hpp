#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "pacc/gait.hpp"
#include "pacc/math_utils.hpp"
#include "pacc/qp.hpp"

namespace pacc {

struct GimbalLock : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneratePolygon : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State layout (30): euler(3) r(3) omega_B(3) rdot(3) feet(4x3, world) d(6).
// Input layout (24): grf(4x3, world) foothold velocities(4x3, world).
inline constexpr int kStateDim = 30;
inline constexpr int kInputDim = 24;
inline constexpr int kIdxEuler = 0;
inline constexpr int kIdxPos = 3;
inline constexpr int kIdxOmega = 6;
inline constexpr int kIdxVel = 9;
inline constexpr int kIdxFeet = 12;
inline constexpr int kIdxDist = 24;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using InputVec = Eigen::Matrix<double, kInputDim, 1>;

struct RobotState {
  Vec3 euler = Vec3::Zero();  // roll, pitch, yaw (ZYX)
  Vec3 r = Vec3::Zero();
  Vec3 omega = Vec3::Zero();  // base frame
  Vec3 rdot = Vec3::Zero();
  std::array<Vec3, kNumLegs> feet{};  // world
  Eigen::Matrix<double, 6, 1> disturbance = Eigen::Matrix<double, 6, 1>::Zero();  // world

  StateVec pack() const;
  static RobotState unpack(const StateVec& x);
};

// Model constants shared by the prediction model; kbar and delta_er_sq are
// the per-solve arm measurements, held constant along the horizon.
struct SrbdParams {
  double mass = 21.0;
  Vec3 inertia_diag{0.287, 1.022, 1.202};
  double gravity = kGravity;
  Vec3 kbar = Vec3::Zero();
  double delta_er_sq = 0.0;
};

StateVec srbd_derivative(const StateVec& x, const InputVec& u, const Vec4& delta,
                         const SrbdParams& params);

void srbd_jacobians(const StateVec& x, const InputVec& u, const Vec4& delta,
                    const SrbdParams& params, Eigen::Matrix<double, kStateDim, kStateDim>* dfdx,
                    Eigen::Matrix<double, kStateDim, kInputDim>* dfdu);

// Explicit-Euler discrete model used by both the transcription and its tests.
StateVec discrete_step(const StateVec& x, const InputVec& u, const Vec4& delta,
                       const SrbdParams& params, double dt);

// Disturbance evolution (spring-coupled end effector).
Eigen::Matrix<double, 6, 1> disturbance_rate(const Vec3& rdot, double psi_dot, const Vec3& kbar,
                                             double delta_er_sq);
Eigen::Matrix<double, 6, 1> disturbance_direct(const Eigen::Matrix<double, 6, 1>& d0,
                                               const Vec3& kbar, const Vec3& delta_er,
                                               const Vec3& delta_er0, double delta_er_sq,
                                               double psi, double psi0);

// Zero-moment point about the plane z = ground_z, with the end-effector
// disturbance force d_lin applied at p_ee (world).
Vec2 zmp_point(const Vec3& r, const Vec3& rddot, const Vec3& p_ee, const Vec3& d_lin, double mass,
               double gravity, double ground_z = 0.0);

// ZMP of a model state/input pair plus its gradients, for the linearized
// stability constraint.
struct ZmpLinearization {
  Vec2 value;
  Eigen::Matrix<double, 2, kStateDim> dx;
  Eigen::Matrix<double, 2, kInputDim> du;
};
ZmpLinearization zmp_linearize(const StateVec& x, const InputVec& u, const Vec4& delta,
                               const SrbdParams& params, const Vec3& p_ee, double ground_z);

struct HalfPlane {
  Vec2 normal;    // outward
  double offset;  // normal . p <= offset (margin already applied)
};

struct SupportPolygon {
  std::vector<HalfPlane> edges;  // counter-clockwise edge order
  std::vector<Vec2> vertices;    // hull before inset, CCW
  double margin_of(const Vec2& p) const;
};

SupportPolygon support_polygon(const std::array<Vec3, kNumLegs>& feet_world,
                               const std::array<bool, kNumLegs>& stance, double margin);

// Pyramid friction residuals, <= 0 feasible. 6 entries per foot:
// fx-mu fz, -fx-mu fz, fy-mu fz, -fy-mu fz, fz-fmax, -fz. Swing feet all zero.
Eigen::Matrix<double, 24, 1> friction_residuals(const InputVec& u, const Vec4& delta, double mu,
                                                double f_max);

struct MpcConfig {
  int horizon = 15;
  double dt = 0.04;
  double mass = 21.0;
  Vec3 inertia_diag{0.287, 1.022, 1.202};
  double gravity = kGravity;
  double mu = 0.6;
  double f_max = 250.0;
  double zmp_margin = 0.04;
  double zmp_margin_padding = 0.01;  // extra inset the plan keeps in reserve

  double w_orientation = 800.0;
  double w_position = 500.0;
  double w_position_z = 3000.0;
  double w_omega = 20.0;
  double w_velocity = 150.0;
  double w_feet = 100.0;
  double w_disturbance = 0.0;
  double w_force = 1e-3;
  double w_foot_velocity = 1e-2;
  double slack_weight = 2e5;

  QpSettings qp;

  Eigen::Matrix<double, kStateDim, 1> state_weights() const;
  bool valid() const {
    return horizon > 0 && dt > 0 && mass > 0 && mu > 0 && f_max > 0 && zmp_margin >= 0;
  }
};

// Reference over the horizon from the guidance command: integrate commanded
// forward/heading velocity from the current pose, keep the desired height
// above the local terrain plane, align roll/pitch with the plane.
struct TerrainPlaneRef {
  Vec2 gradient = Vec2::Zero();
  double height_at(const Vec2& xy) const { return gradient.x() * xy.x() + gradient.y() * xy.y() + offset; }
  double offset = 0.0;
};

Eigen::MatrixXd build_reference(double v_forward, double yaw_rate, const RobotState& state,
                                double desired_height, const TerrainPlaneRef& plane,
                                const MpcConfig& config);

enum class MpcStatus { kOptimal, kMaxIterations, kFallback };

struct MpcSolution {
  Eigen::MatrixXd x_pred;  // 30 x (N+1)
  Eigen::MatrixXd u;       // 24 x N
  double slack_max = 0.0;
  MpcStatus status = MpcStatus::kFallback;
  double solve_ms = 0.0;
  int qp_iterations = 0;
  double kkt_dual = 0.0, kkt_primal = 0.0, kkt_gap = 0.0;
  InputVec u0() const { return u.col(0); }
};

struct MpcInputs {
  StateVec x0;
  Eigen::MatrixXd x_ref;                                 // 30 x (N+1)
  Eigen::Matrix<double, kNumLegs, Eigen::Dynamic> contact;  // 4 x N
  Vec4 contact_now = Vec4::Ones();  // physical stance at solve time
  std::array<Vec3, kNumLegs> foot_targets{};             // world swing targets
  Vec3 kbar = Vec3::Zero();
  Vec3 p_ee_hat = Vec3::Zero();
  double delta_er_sq = 0.0;
  double ground_z = 0.0;
};

// Receding-horizon controller: one linearize-and-solve (real-time iteration)
// per call, warm-started by shifting the previous solution.
class SrbdMpc {
 public:
  explicit SrbdMpc(const MpcConfig& config = {});

  MpcSolution solve(const MpcInputs& inputs);
  const MpcConfig& config() const { return config_; }

 private:
  void initialize_trajectory(const MpcInputs& inputs, const SrbdParams& params);
  void shift_trajectory(const MpcInputs& inputs, const SrbdParams& params);

  MpcConfig config_;
  bool has_previous_ = false;
  Eigen::MatrixXd x_traj_;  // 30 x (N+1)
  Eigen::MatrixXd u_traj_;  // 24 x N
};

}  // namespace pacc
