#pragma once

// Scenario runner with an omniscient oracle, safety checks, metrics and trace
// export.

#include "mlr/cu_agent.hpp"
#include "mlr/scenario.hpp"
#include "mlr/uav_agent.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mlr::harness {

inline constexpr int kFineSteps = 10;  // actual positions per T_c step

struct Event {
  RoundIndex round = 0;
  std::string kind;  // mlr_entry, mlr_exit, deprecated, fallback, request, reply, deadlock, fatal, ...
  int node = -1;
  std::string detail;
};

struct CuRoundRecord {
  CuId cu = 0;
  CuState state_in = CuState::RunDmpc;
  CuState state_out = CuState::RunDmpc;
  bool silent = false;
  int deprecated_trackers = 0;
  std::uint64_t bank_digest = 0;
  std::optional<UavId> selected;
  PlanOutcome outcome = PlanOutcome::None;
  std::string qp_status;
  bool candidate_verified = true;
  std::optional<UavId> planned_uav;
  bool deadlock = false;
};

// One sample per UAV and fine time step; sub counts fine steps inside the
// round, sub % kFineSteps == 0 lies on the T_c grid.
struct UavSample {
  RoundIndex round = 0;
  int sub = 0;
  UavId uav = 0;
  Vec3 reference = Vec3::Zero();
  Vec3 actual = Vec3::Zero();
  double speed = 0.0;
  double target_dist = 0.0;
};

struct RoundRecord {
  RoundIndex round = 0;
  int sent = 0;
  int delivered = 0;
  int lost = 0;
  std::vector<CuRoundRecord> cus;
  std::vector<bool> adopted;        // per UAV
  std::vector<bool> terminal_rest;  // per UAV, current reference ends at rest
  std::vector<std::string> lemma1_failures;
  std::vector<std::string> lemma2_failures;
  std::vector<std::string> theorem1_failures;
  std::vector<std::string> uniqueness_failures;
};

struct Trace {
  Scenario scenario;
  int grid_per_round = 1;  // T / T_c
  std::vector<RoundRecord> rounds;
  std::vector<UavSample> samples;
  std::vector<Event> events;
  bool aborted = false;
  std::string abort_reason;

  double sample_time(RoundIndex k, int sub) const;
};

struct RunOptions {
  bool parallel = false;
};

// Runs the scenario. Fatal invariant breaches end the run early with
// aborted set and a "fatal" event holding the offending state.
Trace run(const Scenario& scenario, const RunOptions& options = {});

struct Violation {
  RoundIndex round = 0;
  int sub = 0;
  UavId i = 0;
  UavId j = 0;
  double distance = 0.0;
};

// Scaled reference distances on the T_c grid below d_hat_min - slack.
std::vector<Violation> check_discrete_collisions(const Trace& trace, const Vec3& theta, double d_hat_min,
                                                 double slack = 1e-9);

// Actual positions (fine grid) closer than d_hat_min - 2 delta_d / theta_min - margin.
std::vector<Violation> check_physical_distance(const Trace& trace, double margin);

// Smallest scaled distance between reference positions on the fine grid.
double min_reference_distance(const Trace& trace, bool grid_only);

struct MarginModel {
  Vec3 theta = Vec3(1, 1, 2);
  double d_hat_min = 0.25;
  double step = 0.2;  // T_c
  Vec3 velocity_max = Vec3::Ones();
  Vec3 acceleration_max = Vec3::Constant(3.0);
  Vec3 jerk_max = Vec3::Constant(10.0);

  static MarginModel from(const OptimizationConfig& cfg);
};

struct MarginEstimate {
  double estimate = 0.0;  // largest sampled encroachment, a lower bound on the true maximum
  int samples = 0;
  int admissible = 0;
};

// Samples pairs of relative motions over one T_c step whose endpoints both lie
// exactly at d_hat_min and reports the deepest intersample encroachment.
MarginEstimate estimate_continuous_margin(const MarginModel& model, int samples, std::uint64_t seed = 0);

// Constant relative velocity, chord of length L inside the d_hat_min ball.
double chord_bound(double d_hat_min, double chord);

// Upper bound on the deviation of a cubic from its chord over one step.
double deviation_bound(const MarginModel& model);

struct OracleReport {
  int rounds = 0;
  int lemma1 = 0;
  int lemma2 = 0;
  int theorem1 = 0;
  int uniqueness = 0;
  bool aborted = false;
  std::vector<std::string> messages;

  bool clean() const { return !aborted && lemma1 == 0 && lemma2 == 0 && theorem1 == 0 && uniqueness == 0; }
};

OracleReport check_theorem_oracles(const Trace& trace);

struct SegmentMetrics {
  RoundIndex start = 0;
  RoundIndex end = 0;
  bool settled = false;
  RoundIndex settle_rounds = 0;  // rounds after start; end - start when not settled
};

struct Metrics {
  std::vector<double> min_target_dist;  // per round, over UAVs
  std::vector<double> max_target_dist;
  std::vector<double> min_pair_dist;    // scaled, per round on the T_c grid
  std::vector<std::vector<double>> target_dist;  // [round][uav]
  std::vector<SegmentMetrics> segments;
  RoundIndex total_settle = 0;
  bool all_settled = false;
};

Metrics metrics(const Trace& trace, double tolerance);

// CSV time series (one row per UAV sample) and JSON-lines events.
std::string samples_csv(const Trace& trace);
std::string metrics_csv(const Metrics& m);
std::string events_jsonl(const Trace& trace);
std::string rounds_jsonl(const Trace& trace);
// Writes samples.csv, metrics.csv, events.jsonl, rounds.jsonl into dir.
void write_trace(const Trace& trace, const Metrics& m, const std::string& dir);

}  // namespace mlr::harness
