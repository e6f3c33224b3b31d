#pragma once

// Event trigger: which M of the N UAVs are replanned in a round.

#include "mlr/messages.hpp"
#include "mlr/tracker.hpp"

#include <optional>
#include <set>
#include <string_view>
#include <vector>

namespace mlr {

enum class TriggerKind { RoundRobin, Distance, Hybrid };

std::string_view to_string(TriggerKind k);
TriggerKind parse_trigger(std::string_view s);  // rr | dt | ht

struct PriorityInputs {
  const TrackerBank* bank = nullptr;
  const std::vector<std::optional<Vec3>>* targets = nullptr;  // per UAV, nullopt if unknown
  RoundIndex round = 0;
  // Last round each UAV's trajectory was calculated. When absent, the
  // metadata of the first candidate stands in.
  const std::vector<RoundIndex>* last_calc = nullptr;
  std::set<UavId> just_recomputed;
  std::set<UavId> deadlocked;
  // Quantization scales: DT per meter, HT per meter-round. DT needs a step
  // below the target tolerance or near-target UAVs all tie at 1.
  double distance_scale = 100.0;
  double hybrid_scale = 10.0;
};

// Raw priority -> 8 bit. RR counts clamp to [0,255]; distance based values
// are scaled by `scale` per unit, rounded, and clamped to [1,255] when
// nonzero.
std::uint8_t quantize_count(double raw);
std::uint8_t quantize_scaled(double raw, double scale = 10.0);

// Throws std::logic_error on a deprecated bank.
PriorityVector compute_priorities(TriggerKind kind, const PriorityInputs& in);

// Same rule set on a bank that may be deprecated: UAVs without candidates get
// the lowest nonzero priority. Used while a CU recovers from message loss.
PriorityVector compute_priorities_best_effort(TriggerKind kind, const PriorityInputs& in);

PriorityVector consensus(const std::vector<PriorityVector>& received);

struct Selection {
  UavId own_uav = 0;
  std::vector<UavId> aet;  // the M selected UAVs, highest priority first
};

Selection select(const PriorityVector& j, int m, RoundIndex k, CuId w);

}  // namespace mlr
