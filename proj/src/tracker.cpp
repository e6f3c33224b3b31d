#include "mlr/tracker.hpp"

#include <algorithm>
#include <string>

namespace mlr {

const ReferenceTrajectory* InformationTracker::find(const TrajectoryMetadata& md) const {
  for (const auto& c : candidates) {
    if (c.metadata == md) return &c;
  }
  return nullptr;
}

TrackerBank TrackerBank::unknown(int num_uavs, RoundIndex start_round) {
  TrackerBank b;
  b.start_round = start_round;
  b.trackers.resize(static_cast<std::size_t>(num_uavs));
  return b;
}

TrackerBank TrackerBank::from_trajectories(const std::vector<ReferenceTrajectory>& current) {
  TrackerBank b;
  if (current.empty()) return b;
  b.start_round = current.front().start_round;
  for (const auto& t : current) {
    if (t.start_round != b.start_round) throw std::invalid_argument("trajectories must share a start round");
    InformationTracker tr;
    tr.candidates.push_back(t);
    tr.deprecated = false;
    b.trackers.push_back(std::move(tr));
  }
  return b;
}

bool TrackerBank::all_up_to_date() const {
  return std::all_of(trackers.begin(), trackers.end(), [](const auto& t) { return t.up_to_date(); });
}

void TrackerBank::set_all_deprecated() {
  for (auto& t : trackers) t.deprecated = true;
}

TrackerBank shift_all(const TrackerBank& bank) {
  TrackerBank out = bank;
  out.start_round = bank.start_round + 1;
  for (auto& t : out.trackers) {
    for (auto& c : t.candidates) c = shift(c);
  }
  return out;
}

TrackerBank ingest_full_trajectory(const TrackerBank& bank, UavId uav, const ReferenceTrajectory& traj) {
  TrackerBank out = bank;
  auto& t = out[uav];
  t.candidates.assign(1, advance_to(traj, bank.start_round));
  t.deprecated = false;
  return out;
}

namespace {

void insert_candidate(InformationTracker& t, ReferenceTrajectory traj) {
  for (auto& c : t.candidates) {
    if (c.metadata == traj.metadata) {
      c = std::move(traj);
      return;
    }
  }
  t.candidates.push_back(std::move(traj));
}

}  // namespace

TrackerBank update(const TrackerBank& bank, const RoundInbox& inbox, int m_total, UpdatePolicy policy,
                   UpdateReport* report) {
  UpdateReport rep;
  TrackerBank out = shift_all(bank);
  const int n = out.size();
  if (static_cast<int>(inbox.uav.size()) != n) throw std::invalid_argument("inbox size does not match bank");

  // Full-trajectory replies in donated slots.
  for (const auto& slot : inbox.cu_slots) {
    if (const auto* r = std::get_if<TrajectoryReply>(&slot)) {
      if (r->uav < 0 || r->uav >= n) throw ProtocolError("reply for unknown UAV");
      out = ingest_full_trajectory(out, r->uav, r->trajectory);
      ++rep.replies;
    }
  }

  // Status messages pin down what each UAV is following.
  for (UavId i = 0; i < n; ++i) {
    const auto& msg = inbox.uav[static_cast<std::size_t>(i)];
    if (!msg) continue;
    auto& t = out[i];
    if (const auto* c = t.find(msg->metadata)) {
      ReferenceTrajectory keep = *c;
      t.candidates.assign(1, std::move(keep));
      t.deprecated = false;
      ++rep.matched;
    } else if (!t.deprecated && policy.loss_recovery) {
      throw ProtocolError("UAV " + std::to_string(i) + " follows a trajectory unknown to an up-to-date tracker");
    }
  }

  if (policy.loss_recovery) {
    for (const auto& t : out.trackers) {
      if (t.candidates.size() > 1) {
        rep.deprecated_ambiguous = true;
        break;
      }
    }
    rep.cu_slots_received = static_cast<int>(inbox.cu_slots.size());
    if (rep.cu_slots_received < m_total) rep.deprecated_missing_cu = true;
    if (rep.deprecated_ambiguous || rep.deprecated_missing_cu) out.set_all_deprecated();
  } else {
    rep.cu_slots_received = static_cast<int>(inbox.cu_slots.size());
    // Assume the newest candidate made it through.
    for (auto& t : out.trackers) {
      if (t.candidates.size() > 1) {
        auto newest = std::max_element(t.candidates.begin(), t.candidates.end(),
                                       [](const auto& a, const auto& b) { return a.metadata < b.metadata; });
        ReferenceTrajectory keep = *newest;
        t.candidates.assign(1, std::move(keep));
      }
      t.deprecated = false;
    }
  }

  // New plans from last round join the candidate sets.
  for (const auto& slot : inbox.cu_slots) {
    const auto* m = std::get_if<CuMessage>(&slot);
    if (!m) continue;
    if (const auto* p = std::get_if<TrajectoryPayload>(&m->payload)) {
      if (p->uav < 0 || p->uav >= n) throw ProtocolError("trajectory for unknown UAV");
      insert_candidate(out[p->uav], advance_to(p->trajectory, out.start_round));
      ++rep.new_trajectories;
    }
  }

  if (report) *report = rep;
  return out;
}

}  // namespace mlr
