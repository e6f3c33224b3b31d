#pragma once

// Experiment description: swarm, network conditions, controller settings and
// a target script.

#include "mlr/deadlock.hpp"
#include "mlr/netsim.hpp"
#include "mlr/planning.hpp"
#include "mlr/trigger.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mlr {

struct TargetSegment {
  RoundIndex start = 0;
  std::vector<Vec3> targets;
};

struct Scenario {
  std::string name = "custom";
  int num_uavs = 0;
  int num_cus = 1;
  RoundIndex rounds = 100;
  TriggerKind trigger = TriggerKind::Hybrid;
  double loss_prob = 0.0;
  std::vector<JamWindow> jams;
  double delta_d_min = 0.05;
  OptimizationConfig optimization;
  DeadlockConfig deadlock;
  bool soft_constraints = false;
  bool planner = false;
  bool loss_recovery = true;
  double distance_scale = 100.0;
  double hybrid_scale = 10.0;
  // hover: every CU starts knowing the initial hover trajectories; request:
  // trackers start empty and are filled through trajectory requests.
  bool hover_bootstrap = true;
  std::uint64_t seed = 0;
  std::vector<Vec3> initial_positions;
  std::vector<TargetSegment> segments;

  RoundSchedule schedule() const;
  // Targets in force during round k.
  const std::vector<Vec3>& targets_at(RoundIndex k) const;
  // Throws std::invalid_argument when the scenario cannot be run safely, e.g.
  // initial positions closer than d_hat_min.
  void validate() const;
};

// Built-in scenarios: formations, circle-exchange, random-targets,
// cross-exchange, hover.
Scenario builtin_scenario(const std::string& name, int num_uavs, int num_cus, std::uint64_t seed);
std::vector<std::string> builtin_names();

// Key-value scenario documents, one "key = value" per line, '#' comments.
// See README for the key list.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
void apply_setting(Scenario& s, const std::string& key, const std::string& value);

// Formation shapes in the default flight box, N points each.
std::vector<Vec3> formation_plane(int n);
std::vector<Vec3> formation_pyramid(int n);
std::vector<Vec3> formation_cube(int n);
std::vector<Vec3> formation_sphere(int n);

// Permutation p minimizing sum |from[i] - to[p[i]]|^2 (Hungarian method).
std::vector<int> assign_targets(const std::vector<Vec3>& from, const std::vector<Vec3>& to);

}  // namespace mlr
