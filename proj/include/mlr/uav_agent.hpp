#pragma once

// UAV side: trajectory adoption, status messages, replies to trajectory
// requests, and bounded-error tracking of the reference.

#include "mlr/messages.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mlr {

// Reference plus a smooth, seeded disturbance of norm at most delta_d_min.
struct TrackingModel {
  double delta_d_min = 0.05;
  std::uint64_t seed = 0;

  Vec3 disturbance(UavId uav, double t) const;
};

class UavAgent {
 public:
  UavAgent(UavId id, ReferenceTrajectory initial, const Vec3& target);

  struct RoundStart {
    bool adopted = false;
    int offers = 0;  // trajectory messages addressed to this UAV
    std::vector<CuId> requests;
  };

  // Round k begins: adopt a trajectory computed in round k-1 if one arrived,
  // otherwise keep following the shifted old one. Requests are queued.
  RoundStart on_round_start(RoundIndex k, const std::vector<CuMessage>& rx);

  struct Emission {
    UavMessage status;
    std::vector<TrajectoryReply> replies;  // one per requesting CU
  };
  Emission emit(std::optional<Vec3> measured = std::nullopt);

  // Reference state at absolute time t.
  NominalState reference(double t, double round_period) const;
  Vec3 actual_position(const TrackingModel& tracking, double t, double round_period) const;

  UavId id() const { return id_; }
  const ReferenceTrajectory& current() const { return current_; }
  const Vec3& target() const { return target_; }
  void set_target(const Vec3& t) { target_ = t; }
  const std::vector<CuId>& pending_replies() const { return pending_; }

 private:
  UavId id_;
  ReferenceTrajectory current_;
  Vec3 target_;
  std::vector<CuId> pending_;
};

}  // namespace mlr
