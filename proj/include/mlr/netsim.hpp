#pragma once

// Round-based many-to-all broadcast with per-receiver loss and jamming.
//
// Node ids: UAVs are 0..N-1, CU w (1-based) is node N + w - 1. Slots follow
// the same order: N UAV slots, then M CU slots.

#include "mlr/nominal.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace mlr {

struct RoundSchedule {
  double period = 0.2;             // T
  double computation_time = 0.105; // T_calc
  double communication_time = 0.095;
  int num_uavs = 0;
  int num_cus = 0;

  int slot_count() const { return num_uavs + num_cus; }
  int node_count() const { return num_uavs + num_cus; }
  int uav_slot(UavId i) const { return i; }
  int cu_slot(CuId w) const { return num_uavs + w - 1; }
  int uav_node(UavId i) const { return i; }
  int cu_node(CuId w) const { return num_uavs + w - 1; }
  bool is_cu_slot(int slot) const { return slot >= num_uavs; }
  void validate() const;
};

// Receivers in `nodes` hear nothing during rounds [start, end).
struct JamWindow {
  RoundIndex start = 0;
  RoundIndex end = 0;
  std::vector<int> nodes;

  bool covers(RoundIndex k, int node) const;
};

// "<start>:<end>:<nodes>" where nodes is a comma list of node ids, uavK, cuK
// (1-based CU id), uavs, cus or all.
JamWindow parse_jam(std::string_view text, const RoundSchedule& schedule);

struct LossModel {
  double loss_prob = 0.0;
  std::vector<JamWindow> jams;
  std::uint64_t seed = 0;

  bool jammed(RoundIndex k, int node) const;
};

struct Envelope {
  int slot = 0;
  int sender = 0;
  std::vector<std::uint8_t> payload;
};

struct RoundDelivery {
  // received[node] lists indices into the transmitted envelopes, slot order.
  std::vector<std::vector<std::size_t>> received;
  std::size_t lost = 0;
};

// Throws std::invalid_argument when two envelopes claim one slot or a slot is
// out of range.
RoundDelivery run_round(RoundIndex k, const std::vector<Envelope>& tx, const LossModel& loss,
                        const RoundSchedule& schedule);

}  // namespace mlr
