#include "mlr/uav_agent.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mlr {

Vec3 TrackingModel::disturbance(UavId uav, double t) const {
  if (delta_d_min <= 0.0) return Vec3::Zero();
  // Two sinusoids per axis with seeded frequencies and phases; each axis stays
  // in [-1/sqrt(3), 1/sqrt(3)] so the vector stays in the unit ball.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(uav)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> freq(0.2, 1.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  Vec3 v;
  for (int a = 0; a < 3; ++a) {
    const double w1 = 2.0 * M_PI * freq(rng), p1 = phase(rng);
    const double w2 = 2.0 * M_PI * freq(rng), p2 = phase(rng);
    v[a] = (std::sin(w1 * t + p1) + std::sin(w2 * t + p2)) / (2.0 * std::sqrt(3.0));
  }
  return delta_d_min * v;
}

UavAgent::UavAgent(UavId id, ReferenceTrajectory initial, const Vec3& target)
    : id_(id), current_(std::move(initial)), target_(target) {}

UavAgent::RoundStart UavAgent::on_round_start(RoundIndex k, const std::vector<CuMessage>& rx) {
  RoundStart out;
  const TrajectoryPayload* chosen = nullptr;
  CuId chosen_cu = 0;
  for (const auto& m : rx) {
    if (const auto* t = std::get_if<TrajectoryPayload>(&m.payload); t && t->uav == id_) {
      ++out.offers;
      // Two offers only happen when loss handling is disabled; the lowest CU
      // id wins.
      if (!chosen || m.sender < chosen_cu) {
        chosen = t;
        chosen_cu = m.sender;
      }
    }
    if (const auto* r = std::get_if<RequestPayload>(&m.payload); r && r->uav == id_) {
      if (std::find(pending_.begin(), pending_.end(), r->requester) == pending_.end()) {
        pending_.push_back(r->requester);
      }
      out.requests.push_back(r->requester);
    }
  }
  if (chosen) {
    if (chosen->trajectory.start_round != k - 1) throw std::logic_error("trajectory offered for the wrong round");
    current_ = chosen->trajectory;
    out.adopted = true;
  } else {
    current_ = advance_to(current_, k - 1);
  }
  std::sort(pending_.begin(), pending_.end());
  return out;
}

UavAgent::Emission UavAgent::emit(std::optional<Vec3> measured) {
  Emission e;
  e.status.sender = id_;
  e.status.metadata = current_.metadata;
  e.status.target = target_;
  e.status.measured_position = measured;
  for (CuId w : pending_) e.replies.push_back(TrajectoryReply{id_, w, current_});
  pending_.clear();
  return e;
}

NominalState UavAgent::reference(double t, double round_period) const {
  const double t0 = static_cast<double>(current_.start_round + 1) * round_period;
  return sample(current_, t - t0);
}

Vec3 UavAgent::actual_position(const TrackingModel& tracking, double t, double round_period) const {
  return reference(t, round_period).position + tracking.disturbance(id_, t);
}

}  // namespace mlr
