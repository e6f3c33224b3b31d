#pragma once

// Compute unit: tracker update, event trigger, trajectory optimization and
// loss recovery, one step per round.

#include "mlr/deadlock.hpp"
#include "mlr/messages.hpp"
#include "mlr/planning.hpp"
#include "mlr/tracker.hpp"
#include "mlr/trigger.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace mlr {

enum class CuState { RunDmpc, Wait, RequestTrajectory, WaitForUpdate };

std::string_view to_string(CuState s);

// The edges of the CU state machine.
bool allowed_transition(CuState from, CuState to);

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CuConfig {
  CuId id = 1;
  int num_uavs = 0;
  int num_cus = 1;
  TriggerKind trigger = TriggerKind::Hybrid;
  OptimizationConfig optimization;
  DeadlockConfig deadlock;
  bool soft_constraints = false;
  bool planner = false;
  bool loss_recovery = true;
  qp::SolverSettings solver{1e-10, 4000};
  double verify_tol = 1e-9;
  int planner_hold_rounds = 15;
  double distance_scale = 100.0;
  double hybrid_scale = 10.0;
  std::uint64_t seed = 0;
};

enum class PlanOutcome { None, Solved, Fallback };

struct CuStepRecord {
  RoundIndex round = 0;
  CuState state_in = CuState::RunDmpc;
  CuState state_out = CuState::RunDmpc;
  bool silent = false;
  bool updated = false;
  UpdateReport update;
  std::optional<UavId> selected;
  std::vector<UavId> aet;
  PlanOutcome outcome = PlanOutcome::None;
  std::optional<qp::QpStatus> qp_status;
  int qp_iterations = 0;
  bool candidate_verified = true;
  std::optional<ReferenceTrajectory> plan;
  std::optional<UavId> requested;
  bool deadlock = false;
  std::optional<IntermediateTarget> intermediate;
};

class CuAgent {
 public:
  CuAgent(CuConfig cfg, TrackerBank initial, std::vector<std::optional<Vec3>> targets);

  // Round k. rx holds what this CU received in the communication phase of
  // round k-1. Returns nothing when the CU stays silent.
  std::optional<CuMessage> step(RoundIndex k, const RoundInbox& rx);

  const CuConfig& config() const { return cfg_; }
  const TrackerBank& bank() const { return bank_; }
  CuState state() const { return state_; }
  const CuStepRecord& record() const { return record_; }
  const std::vector<std::optional<Vec3>>& targets() const { return targets_; }
  const std::map<UavId, IntermediateTarget>& intermediate_targets() const { return intermediate_; }

 private:
  CuMessage run_dmpc(RoundIndex k, const RoundInbox& in);
  PriorityVector priorities(RoundIndex k, const std::set<UavId>& just_recomputed, bool strict) const;
  Vec3 planning_target(UavId uav, RoundIndex k, const std::vector<NominalState>& states);

  CuConfig cfg_;
  TrackerBank bank_;
  CuState state_ = CuState::RunDmpc;
  std::vector<std::optional<Vec3>> targets_;
  std::vector<RoundIndex> last_calc_;
  std::map<UavId, IntermediateTarget> intermediate_;
  std::set<UavId> deadlocked_;
  RoundIndex planner_until_ = -1;
  std::optional<CuMessage> last_tx_;
  CuStepRecord record_;
  std::mt19937_64 rng_;
};

}  // namespace mlr
