#include "mlr/netsim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace mlr {

void RoundSchedule::validate() const {
  if (num_uavs < 1 || num_cus < 1) throw std::invalid_argument("need at least one UAV and one CU");
  if (!(period > 0.0) || computation_time < 0.0 || communication_time < 0.0 ||
      std::abs(computation_time + communication_time - period) > 1e-9) {
    throw std::invalid_argument("round period must equal computation plus communication time");
  }
}

bool JamWindow::covers(RoundIndex k, int node) const {
  return k >= start && k < end && std::find(nodes.begin(), nodes.end(), node) != nodes.end();
}

namespace {

long parse_int(std::string_view s, const char* what) {
  long v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw std::invalid_argument(std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

JamWindow parse_jam(std::string_view text, const RoundSchedule& sc) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw std::invalid_argument("jam must look like start:end:nodes");
  JamWindow j;
  j.start = parse_int(text.substr(0, c1), "jam start");
  j.end = parse_int(text.substr(c1 + 1, c2 - c1 - 1), "jam end");
  if (j.end < j.start) throw std::invalid_argument("jam end before start");
  std::string_view rest = text.substr(c2 + 1);
  auto add = [&](int node) {
    if (node < 0 || node >= sc.node_count()) throw std::invalid_argument("jam node out of range");
    if (std::find(j.nodes.begin(), j.nodes.end(), node) == j.nodes.end()) j.nodes.push_back(node);
  };
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view tok = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (tok == "all") {
      for (int n = 0; n < sc.node_count(); ++n) add(n);
    } else if (tok == "cus") {
      for (CuId w = 1; w <= sc.num_cus; ++w) add(sc.cu_node(w));
    } else if (tok == "uavs") {
      for (UavId i = 0; i < sc.num_uavs; ++i) add(sc.uav_node(i));
    } else if (tok.starts_with("cu")) {
      const long w = parse_int(tok.substr(2), "CU id");
      if (w < 1 || w > sc.num_cus) throw std::invalid_argument("jam CU id out of range");
      add(sc.cu_node(static_cast<CuId>(w)));
    } else if (tok.starts_with("uav")) {
      const long i = parse_int(tok.substr(3), "UAV id");
      if (i < 0 || i >= sc.num_uavs) throw std::invalid_argument("jam UAV id out of range");
      add(sc.uav_node(static_cast<UavId>(i)));
    } else {
      add(static_cast<int>(parse_int(tok, "node id")));
    }
  }
  std::sort(j.nodes.begin(), j.nodes.end());
  return j;
}

bool LossModel::jammed(RoundIndex k, int node) const {
  return std::any_of(jams.begin(), jams.end(), [&](const JamWindow& j) { return j.covers(k, node); });
}

RoundDelivery run_round(RoundIndex k, const std::vector<Envelope>& tx, const LossModel& loss,
                        const RoundSchedule& sc) {
  if (loss.loss_prob < 0.0 || loss.loss_prob > 1.0) throw std::invalid_argument("loss probability outside [0,1]");
  const int slots = sc.slot_count();
  const int nodes = sc.node_count();
  std::vector<int> by_slot(static_cast<std::size_t>(slots), -1);
  for (std::size_t e = 0; e < tx.size(); ++e) {
    const int s = tx[e].slot;
    if (s < 0 || s >= slots) throw std::invalid_argument("envelope slot out of range");
    if (by_slot[static_cast<std::size_t>(s)] >= 0) {
      throw std::invalid_argument("two envelopes claim slot " + std::to_string(s));
    }
    by_slot[static_cast<std::size_t>(s)] = static_cast<int>(e);
  }

  // One stream per round so a round's pattern does not depend on traffic in
  // earlier rounds.
  const auto useed = static_cast<std::uint64_t>(loss.seed);
  const auto uround = static_cast<std::uint64_t>(k);
  std::seed_seq seq{static_cast<std::uint32_t>(useed), static_cast<std::uint32_t>(useed >> 32),
                    static_cast<std::uint32_t>(uround), static_cast<std::uint32_t>(uround >> 32)};
  std::mt19937_64 rng(seq);

  RoundDelivery out;
  out.received.resize(static_cast<std::size_t>(nodes));
  for (int s = 0; s < slots; ++s) {
    const int e = by_slot[static_cast<std::size_t>(s)];
    for (int r = 0; r < nodes; ++r) {
      // Draw for every (slot, receiver) pair so the stream layout is fixed.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (e < 0) continue;
      if (loss.jammed(k, r)) {
        ++out.lost;
        continue;
      }
      const bool own = tx[static_cast<std::size_t>(e)].sender == r;
      if (!own && u < loss.loss_prob) {
        ++out.lost;
        continue;
      }
      out.received[static_cast<std::size_t>(r)].push_back(static_cast<std::size_t>(e));
    }
  }
  return out;
}

}  // namespace mlr
