#pragma once

// Messages exchanged in one communication round.

#include "mlr/nominal.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace mlr {

// One quantized priority per UAV. Zero means "recomputed last round, do not
// select".
using PriorityVector = std::vector<std::uint8_t>;

struct IntermediateTarget {
  UavId uav = 0;
  Vec3 position = Vec3::Zero();
  bool active = false;

  bool operator==(const IntermediateTarget&) const = default;
};

struct EmptyPayload {
  bool operator==(const EmptyPayload&) const = default;
};

struct TrajectoryPayload {
  UavId uav = 0;
  ReferenceTrajectory trajectory;

  bool operator==(const TrajectoryPayload&) const = default;
};

struct RequestPayload {
  UavId uav = 0;
  CuId requester = 0;

  bool operator==(const RequestPayload&) const = default;
};

struct CuMessage {
  CuId sender = 0;
  std::variant<EmptyPayload, TrajectoryPayload, RequestPayload> payload;
  std::optional<PriorityVector> priorities;
  // Logging extension: planner targets the sender set or cleared this round.
  std::vector<IntermediateTarget> planner_targets;

  bool operator==(const CuMessage&) const = default;
};

struct UavMessage {
  UavId sender = 0;
  TrajectoryMetadata metadata;
  Vec3 target = Vec3::Zero();
  std::optional<Vec3> measured_position;  // logging only

  bool operator==(const UavMessage&) const = default;
};

// A UAV's full current trajectory, sent in the slot of the CU that requested
// it.
struct TrajectoryReply {
  UavId uav = 0;
  CuId slot_owner = 0;
  ReferenceTrajectory trajectory;

  bool operator==(const TrajectoryReply&) const = default;
};

using CuSlotContent = std::variant<CuMessage, TrajectoryReply>;

// Everything one node received in a communication round, already parsed.
struct RoundInbox {
  std::vector<std::optional<UavMessage>> uav;  // indexed by UAV id
  std::vector<CuSlotContent> cu_slots;         // in slot order

  static RoundInbox empty(int num_uavs) {
    RoundInbox in;
    in.uav.resize(static_cast<std::size_t>(num_uavs));
    return in;
  }
};

}  // namespace mlr
