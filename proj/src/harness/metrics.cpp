#include "mlr/harness.hpp"

#include <algorithm>
#include <limits>

namespace mlr::harness {

Metrics metrics(const Trace& trace, double tolerance) {
  const int n = trace.scenario.num_uavs;
  const int fine = trace.grid_per_round * kFineSteps;
  const auto per = static_cast<std::size_t>(n * fine);
  const auto rounds = static_cast<RoundIndex>(per == 0 ? 0 : trace.samples.size() / per);
  const Vec3& theta = trace.scenario.optimization.theta;

  Metrics m;
  for (RoundIndex k = 0; k < rounds; ++k) {
    std::vector<double> dist(static_cast<std::size_t>(n));
    std::vector<Vec3> pos(static_cast<std::size_t>(n));
    for (UavId i = 0; i < n; ++i) {
      // Round start, on the T_c grid.
      const auto& s = trace.samples[static_cast<std::size_t>((k * n + i) * fine)];
      dist[static_cast<std::size_t>(i)] = s.target_dist;
      pos[static_cast<std::size_t>(i)] = s.reference;
    }
    m.min_target_dist.push_back(*std::min_element(dist.begin(), dist.end()));
    m.max_target_dist.push_back(*std::max_element(dist.begin(), dist.end()));
    double pair = std::numeric_limits<double>::infinity();
    for (UavId i = 0; i < n; ++i) {
      for (UavId j = i + 1; j < n; ++j) {
        pair = std::min(pair, scaled_norm(pos[static_cast<std::size_t>(j)] - pos[static_cast<std::size_t>(i)], theta));
      }
    }
    m.min_pair_dist.push_back(pair);
    m.target_dist.push_back(std::move(dist));
  }

  const auto& segs = trace.scenario.segments;
  m.all_settled = true;
  for (std::size_t g = 0; g < segs.size(); ++g) {
    SegmentMetrics sm;
    sm.start = segs[g].start;
    sm.end = g + 1 < segs.size() ? segs[g + 1].start : trace.scenario.rounds;
    if (sm.start >= trace.scenario.rounds) break;
    // Walk backwards: the settle round is the start of the final run of
    // rounds where every UAV is within tolerance.
    RoundIndex settle = sm.end;
    const RoundIndex last = std::min(sm.end, rounds);
    if (last == sm.end) {
      for (RoundIndex k = last - 1; k >= sm.start; --k) {
        if (m.max_target_dist[static_cast<std::size_t>(k)] > tolerance) break;
        settle = k;
      }
    }
    sm.settled = settle < sm.end;
    sm.settle_rounds = settle - sm.start;
    m.all_settled = m.all_settled && sm.settled;
    m.total_settle += sm.settle_rounds;
    m.segments.push_back(sm);
  }
  return m;
}

}  // namespace mlr::harness
