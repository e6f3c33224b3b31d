#include "mlr/trigger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mlr {

std::string_view to_string(TriggerKind k) {
  switch (k) {
    case TriggerKind::RoundRobin: return "rr";
    case TriggerKind::Distance: return "dt";
    case TriggerKind::Hybrid: return "ht";
  }
  return "?";
}

TriggerKind parse_trigger(std::string_view s) {
  if (s == "rr") return TriggerKind::RoundRobin;
  if (s == "dt") return TriggerKind::Distance;
  if (s == "ht") return TriggerKind::Hybrid;
  throw std::invalid_argument("unknown trigger '" + std::string(s) + "'");
}

std::uint8_t quantize_count(double raw) {
  if (!(raw > 0.0)) return 0;
  return static_cast<std::uint8_t>(std::min(255.0, std::round(raw)));
}

std::uint8_t quantize_scaled(double raw, double scale) {
  if (!(raw > 0.0)) return 0;
  const double q = std::round(raw * scale);
  return static_cast<std::uint8_t>(std::clamp(q, 1.0, 255.0));
}

namespace {

PriorityVector priorities(TriggerKind kind, const PriorityInputs& in, bool strict) {
  if (!in.bank) throw std::invalid_argument("priority inputs need a bank");
  const TrackerBank& bank = *in.bank;
  if (strict && !bank.all_up_to_date()) throw std::logic_error("priorities requested on a deprecated bank");
  const int n = bank.size();
  PriorityVector out(static_cast<std::size_t>(n), 1);
  for (UavId i = 0; i < n; ++i) {
    const auto& t = bank[i];
    if (t.candidates.empty()) continue;  // best effort only
    const ReferenceTrajectory& first = t.candidates.front();
    const RoundIndex calc = in.last_calc ? in.last_calc->at(static_cast<std::size_t>(i)) : first.metadata.calc_round;
    const double rounds = static_cast<double>(in.round - calc);
    double dist = 0.0;
    if (in.targets) {
      const auto& tgt = in.targets->at(static_cast<std::size_t>(i));
      if (tgt) dist = (*tgt - first.initial_state.position).norm();
    }
    std::uint8_t q = 0;
    switch (kind) {
      case TriggerKind::RoundRobin: q = quantize_count(rounds); break;
      case TriggerKind::Distance: q = quantize_scaled(dist, in.distance_scale); break;
      case TriggerKind::Hybrid: q = quantize_scaled(dist * rounds, in.hybrid_scale); break;
    }
    out[static_cast<std::size_t>(i)] = q;
  }
  for (UavId i : in.just_recomputed) out.at(static_cast<std::size_t>(i)) = 0;
  for (UavId i : in.deadlocked) out.at(static_cast<std::size_t>(i)) = 1;
  return out;
}

}  // namespace

PriorityVector compute_priorities(TriggerKind kind, const PriorityInputs& in) { return priorities(kind, in, true); }

PriorityVector compute_priorities_best_effort(TriggerKind kind, const PriorityInputs& in) {
  return priorities(kind, in, false);
}

PriorityVector consensus(const std::vector<PriorityVector>& received) {
  if (received.empty()) throw std::invalid_argument("consensus needs at least one vector");
  const std::size_t n = received.front().size();
  PriorityVector out(n, 0);
  std::vector<bool> zero(n, false);
  for (const auto& v : received) {
    if (v.size() != n) throw std::invalid_argument("priority vectors differ in length");
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == 0) zero[i] = true;
      out[i] = std::max(out[i], v[i]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (zero[i]) out[i] = 0;
  }
  return out;
}

Selection select(const PriorityVector& j, int m, RoundIndex k, CuId w) {
  const int n = static_cast<int>(j.size());
  if (m < 1 || n < m) throw std::invalid_argument("select needs 1 <= M <= N");
  std::vector<UavId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](UavId a, UavId b) {
    return j[static_cast<std::size_t>(a)] > j[static_cast<std::size_t>(b)];
  });
  Selection s;
  s.aet.assign(ids.begin(), ids.begin() + m);
  const auto pos = static_cast<std::size_t>(((k + w) % m + m) % m);
  s.own_uav = s.aet[pos];
  return s;
}

}  // namespace mlr
