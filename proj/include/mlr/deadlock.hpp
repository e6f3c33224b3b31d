#pragma once

// Deadlock detection, the make-room planner and soft-constraint weights.

#include "mlr/planning.hpp"
#include "mlr/tracker.hpp"

#include <optional>
#include <random>
#include <vector>

namespace mlr {

struct DeadlockConfig {
  double velocity_threshold = 0.05;
  double target_tolerance = 0.05;
  double make_room_radius = 1.0;
  double push_distance = 0.5;
  double noise_scale = 0.1;

  void validate() const;
};

// Reference state of every UAV at the start of the current plan, taken from
// the first candidate of each tracker.
std::vector<NominalState> reference_states(const TrackerBank& bank);

// All reference speeds below the threshold while some UAV is away from its
// target. UAVs with unknown targets count as converged.
bool detect(const TrackerBank& bank, const std::vector<std::optional<Vec3>>& targets, const DeadlockConfig& cfg);

// UAVs that are slow and away from their target.
std::vector<UavId> stalled(const std::vector<NominalState>& states, const std::vector<std::optional<Vec3>>& targets,
                           const DeadlockConfig& cfg);

// Condition check of the planner, separated for tests. True when i should
// make room for j.
bool should_make_room(UavId i, UavId j, const std::vector<NominalState>& states,
                      const std::vector<std::optional<Vec3>>& targets, const DeadlockConfig& cfg, double d_hat_min);

std::optional<IntermediateTarget> make_room(UavId i, const std::vector<NominalState>& states,
                                            const std::vector<std::optional<Vec3>>& targets,
                                            const DeadlockConfig& cfg, double d_hat_min, std::mt19937_64& rng);

// Weight of UAV i's slack towards j: boosted when j is on i's right.
double right_side_weight(UavId i, UavId j, const std::vector<NominalState>& states, const OptimizationConfig& cfg);

}  // namespace mlr
