#include "mlr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mlr::harness {

namespace {

int fine_per_round(const Trace& t) { return t.grid_per_round * kFineSteps; }

// Complete rounds of samples only; a run aborted inside the UAV phase leaves a
// partial round behind.
RoundIndex sampled_rounds(const Trace& t) {
  const auto per = static_cast<std::size_t>(t.scenario.num_uavs * fine_per_round(t));
  return per == 0 ? 0 : static_cast<RoundIndex>(t.samples.size() / per);
}

const UavSample& at(const Trace& t, RoundIndex k, UavId i, int sub) {
  const int n = t.scenario.num_uavs, f = fine_per_round(t);
  return t.samples[static_cast<std::size_t>((k * n + i) * f + sub)];
}

template <typename F>
void for_pairs(const Trace& t, bool grid_only, F&& f) {
  const int n = t.scenario.num_uavs, fine = fine_per_round(t);
  const RoundIndex rounds = sampled_rounds(t);
  for (RoundIndex k = 0; k < rounds; ++k) {
    for (int s = 0; s < fine; ++s) {
      if (grid_only && s % kFineSteps != 0) continue;
      for (UavId i = 0; i < n; ++i) {
        for (UavId j = i + 1; j < n; ++j) f(k, s, at(t, k, i, s), at(t, k, j, s));
      }
    }
  }
}

}  // namespace

std::vector<Violation> check_discrete_collisions(const Trace& trace, const Vec3& theta, double d_hat_min,
                                                 double slack) {
  std::vector<Violation> out;
  for_pairs(trace, true, [&](RoundIndex k, int s, const UavSample& a, const UavSample& b) {
    const double d = scaled_norm(b.reference - a.reference, theta);
    if (d < d_hat_min - slack) out.push_back({k, s, a.uav, b.uav, d});
  });
  return out;
}

std::vector<Violation> check_physical_distance(const Trace& trace, double margin) {
  const auto& o = trace.scenario.optimization;
  const double bound = o.d_hat_min - 2.0 * trace.scenario.delta_d_min / o.theta.minCoeff() - margin;
  std::vector<Violation> out;
  for_pairs(trace, false, [&](RoundIndex k, int s, const UavSample& a, const UavSample& b) {
    const double d = scaled_norm(b.actual - a.actual, o.theta);
    if (d < bound) out.push_back({k, s, a.uav, b.uav, d});
  });
  return out;
}

double min_reference_distance(const Trace& trace, bool grid_only) {
  double best = std::numeric_limits<double>::infinity();
  const Vec3& theta = trace.scenario.optimization.theta;
  for_pairs(trace, grid_only, [&](RoundIndex, int, const UavSample& a, const UavSample& b) {
    best = std::min(best, scaled_norm(b.reference - a.reference, theta));
  });
  return best;
}

MarginModel MarginModel::from(const OptimizationConfig& cfg) {
  MarginModel m;
  m.theta = cfg.theta;
  m.d_hat_min = cfg.d_hat_min;
  m.step = cfg.bvc_sampling_time;
  auto half_width = [](const Box3& b) {
    return Vec3((b.upper - b.lower).cwiseAbs() / 2.0);
  };
  m.velocity_max = half_width(cfg.state_box.velocity);
  m.acceleration_max = half_width(cfg.state_box.acceleration);
  m.jerk_max = half_width(cfg.input_box);
  return m;
}

MarginEstimate estimate_continuous_margin(const MarginModel& model, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x3a91u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::normal_distribution<double> gauss;
  const double tc = model.step;
  const double r = model.d_hat_min;
  const Vec3 inv = model.theta.cwiseInverse();
  auto draw = [&](const Vec3& lim) {
    // Extreme points are where the encroachment peaks, so bias half the
    // draws onto the box corners.
    Vec3 v;
    for (int a = 0; a < 3; ++a) {
      const double x = sym(rng);
      v[a] = lim[a] * (rng() & 1 ? x : (x < 0 ? -1.0 : 1.0));
    }
    return v;
  };
  constexpr int kTau = 64;
  MarginEstimate est;
  est.samples = samples;
  for (int n = 0; n < samples; ++n) {
    // Relative motion of j with respect to i, in scaled coordinates.
    const Vec3 dv = (draw(model.velocity_max) - draw(model.velocity_max)).cwiseProduct(inv);
    const Vec3 da = (draw(model.acceleration_max) - draw(model.acceleration_max)).cwiseProduct(inv);
    const Vec3 du = (draw(model.jerk_max) - draw(model.jerk_max)).cwiseProduct(inv);
    auto disp = [&](double t) { return Vec3(dv * t + da * t * t / 2.0 + du * t * t * t / 6.0); };
    const Vec3 d = disp(tc);
    const double half = d.norm() / 2.0;
    if (half > r) continue;
    // Start so that both endpoints sit exactly on the d_hat_min sphere.
    Vec3 w;
    if (half < 1e-15) {
      w = Vec3(gauss(rng), gauss(rng), gauss(rng));
    } else {
      const Vec3 dir = d / d.norm();
      w = Vec3(gauss(rng), gauss(rng), gauss(rng));
      w -= dir * dir.dot(w);
    }
    if (w.norm() < 1e-12) continue;
    w *= std::sqrt(std::max(0.0, r * r - half * half)) / w.norm();
    const Vec3 s0 = -d / 2.0 + w;
    ++est.admissible;
    double closest = std::min(s0.norm(), (s0 + d).norm());
    for (int q = 1; q < kTau; ++q) closest = std::min(closest, (s0 + disp(tc * q / kTau)).norm());
    est.estimate = std::max(est.estimate, r - closest);
  }
  return est;
}

double chord_bound(double d_hat_min, double chord) {
  const double h = std::min(chord / 2.0, d_hat_min);
  return d_hat_min - std::sqrt(d_hat_min * d_hat_min - h * h);
}

double deviation_bound(const MarginModel& m) {
  const Vec3 inv = m.theta.cwiseInverse();
  const double da = 2.0 * m.acceleration_max.cwiseProduct(inv).norm();
  const double du = 2.0 * m.jerk_max.cwiseProduct(inv).norm();
  const double t = m.step;
  return da * t * t / 8.0 + du * t * t * t / (9.0 * std::sqrt(3.0));
}

OracleReport check_theorem_oracles(const Trace& trace) {
  OracleReport rep;
  rep.aborted = trace.aborted;
  if (trace.aborted) rep.messages.push_back("aborted: " + trace.abort_reason);
  for (const auto& r : trace.rounds) {
    ++rep.rounds;
    auto note = [&](const std::vector<std::string>& fails, int& counter, const char* what) {
      counter += static_cast<int>(fails.size());
      for (const auto& f : fails) rep.messages.push_back("round " + std::to_string(r.round) + " " + what + ": " + f);
    };
    note(r.lemma1_failures, rep.lemma1, "lemma1");
    note(r.lemma2_failures, rep.lemma2, "lemma2");
    note(r.theorem1_failures, rep.theorem1, "theorem1");
    note(r.uniqueness_failures, rep.uniqueness, "uniqueness");
  }
  return rep;
}

}  // namespace mlr::harness
