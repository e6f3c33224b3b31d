#pragma once

// Information trackers: per UAV, the set of trajectories a CU believes the
// UAV may currently be following.

#include "mlr/messages.hpp"
#include "mlr/nominal.hpp"

#include <stdexcept>
#include <vector>

namespace mlr {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InformationTracker {
  std::vector<ReferenceTrajectory> candidates;
  bool deprecated = true;

  bool up_to_date() const { return !deprecated; }
  bool singleton() const { return candidates.size() == 1; }
  const ReferenceTrajectory* find(const TrajectoryMetadata& md) const;
  bool operator==(const InformationTracker&) const = default;
};

struct TrackerBank {
  // start_round of every stored candidate. After the update of round k this
  // is k - 1.
  RoundIndex start_round = -1;
  std::vector<InformationTracker> trackers;

  static TrackerBank unknown(int num_uavs, RoundIndex start_round);
  static TrackerBank from_trajectories(const std::vector<ReferenceTrajectory>& current);

  int size() const { return static_cast<int>(trackers.size()); }
  const InformationTracker& operator[](UavId i) const { return trackers.at(static_cast<std::size_t>(i)); }
  InformationTracker& operator[](UavId i) { return trackers.at(static_cast<std::size_t>(i)); }
  bool all_up_to_date() const;
  bool any_deprecated() const { return !all_up_to_date(); }
  void set_all_deprecated();
  bool operator==(const TrackerBank&) const = default;
};

struct UpdatePolicy {
  // false: ablation that ignores message loss. Trackers are never deprecated,
  // unmatched metadata is ignored and ambiguity is resolved by assuming the
  // newest trajectory arrived.
  bool loss_recovery = true;
};

struct UpdateReport {
  int matched = 0;
  int replies = 0;
  int new_trajectories = 0;
  int cu_slots_received = 0;
  bool deprecated_ambiguous = false;
  bool deprecated_missing_cu = false;
};

// One tracker update from the messages of the previous communication round.
// Candidates are shifted to the new round first so the whole bank starts at
// bank.start_round + 1.
TrackerBank update(const TrackerBank& bank, const RoundInbox& inbox, int m_total, UpdatePolicy policy = {},
                   UpdateReport* report = nullptr);

TrackerBank ingest_full_trajectory(const TrackerBank& bank, UavId uav, const ReferenceTrajectory& traj);

TrackerBank shift_all(const TrackerBank& bank);

}  // namespace mlr
