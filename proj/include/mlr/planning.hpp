#pragma once

// Per-UAV trajectory optimization: cost, dynamics in condensed form, input
// and state boxes, terminal rest, and time-varying BVC halfspaces.
//
// Decision vector: 3 * h_s jerks ordered (step, axis), then one slack per
// neighbor when soft constraints are on. A slack tightens its neighbor's
// halfspaces; it never loosens them.

#include "mlr/nominal.hpp"
#include "mlr/qp_solver.hpp"
#include "mlr/tracker.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace mlr {

struct Box3 {
  Vec3 lower = Vec3::Constant(-std::numeric_limits<double>::infinity());
  Vec3 upper = Vec3::Constant(std::numeric_limits<double>::infinity());

  bool contains(const Vec3& v, double tol = 0.0) const;
};

struct StateBox {
  Box3 position;
  Box3 velocity;
  Box3 acceleration;
};

struct OptimizationConfig {
  HorizonConfig horizon;
  double bvc_sampling_time = 0.2;   // T_c
  int bvc_steps = 15;               // h_c
  double box_sampling_time = 0.2;   // T_b
  int box_steps = 15;               // h_b
  double cost_sampling_time = 0.2;  // T_o
  int cost_steps = 15;              // h_o
  Vec3 position_weight = Vec3::Ones();
  Vec3 velocity_weight = Vec3::Zero();
  Vec3 acceleration_weight = Vec3::Zero();
  double input_weight = 1e-2;
  double d_hat_min = 0.25;
  Vec3 theta = Vec3(1.0, 1.0, 2.0);  // diagonal of the downwash scaling
  Box3 input_box{Vec3::Constant(-10.0), Vec3::Constant(10.0)};
  StateBox state_box{Box3{Vec3(-1.7, -1.7, 0.0), Vec3(1.7, 1.7, 2.6)}, Box3{Vec3::Constant(-1.0), Vec3::Constant(1.0)},
                     Box3{Vec3::Constant(-3.0), Vec3::Constant(3.0)}};
  double soft_weight_base = 1e3;
  double soft_weight_right = 1e4;
  double soft_clearance = 0.25;  // slack value at which the soft reward saturates

  double round_period() const { return horizon.round_period; }
  // Throws std::invalid_argument on inconsistent timing or bad bounds.
  void validate() const;
};

// ‖Θ⁻¹ v‖
double scaled_norm(const Vec3& v, const Vec3& theta);

// n0' Θ⁻¹ (anchor - p) >= rhs, to hold at local plan time time_index * T_c.
struct BvcHalfspace {
  Vec3 normal = Vec3::UnitX();
  double rhs = 0.0;
  int time_index = 1;
  UavId other_uav = 0;
  bool relaxed = false;
  Vec3 anchor = Vec3::Zero();  // the other UAV's reference position

  // Signed distance of the constraint, nonnegative when satisfied.
  double margin(const Vec3& p, const Vec3& theta) const;
};

// Halfspaces against every candidate of one neighbor. `own` and the candidates
// share a start round k-1; the constrained plan starts at round k.
std::vector<BvcHalfspace> build_bvc(const ReferenceTrajectory& own, const std::vector<ReferenceTrajectory>& others,
                                    UavId other_uav, bool other_in_aet, const OptimizationConfig& config);

struct PlanningRequest {
  UavId uav = 0;
  RoundIndex round = 0;  // k
  CuId cu = 0;
  Vec3 target = Vec3::Zero();
  std::vector<UavId> aet;
  bool soft = false;
  // Per-UAV slack weight when soft; empty means soft_weight_base for all.
  std::vector<double> slack_weights;
};

struct TrajectoryProblem {
  qp::QuadraticProgram qp;
  UavId uav = 0;
  RoundIndex round = 0;
  CuId cu = 0;
  NominalState initial_state;
  ReferenceTrajectory shifted_candidate;  // the previous plan shifted to round k
  std::vector<BvcHalfspace> halfspaces;
  std::vector<int> slack_index;  // per UAV, -1 when none
  int jerk_variables = 0;
  OptimizationConfig config;
};

// Preconditions: the bank is not deprecated and the UAV's tracker is a
// singleton; violations throw std::logic_error.
TrajectoryProblem build_problem(const PlanningRequest& request, const TrackerBank& bank,
                                const OptimizationConfig& config);

ReferenceTrajectory extract_trajectory(const TrajectoryProblem& problem, const Eigen::VectorXd& x);
Eigen::VectorXd decision_vector(const TrajectoryProblem& problem, const ReferenceTrajectory& traj);

// True iff traj starts at the problem's initial condition and satisfies every
// constraint of the problem with zero slack.
bool verify_candidate(const ReferenceTrajectory& traj, const TrajectoryProblem& problem, double tol = 1e-9);

struct PlanResult {
  qp::QpSolution solution;
  std::optional<ReferenceTrajectory> trajectory;  // set when optimal
};

PlanResult solve_problem(const TrajectoryProblem& problem, const qp::SolverSettings& settings = {});

}  // namespace mlr
