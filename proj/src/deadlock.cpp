#include "mlr/deadlock.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlr {

void DeadlockConfig::validate() const {
  if (!(velocity_threshold > 0.0 && target_tolerance > 0.0 && make_room_radius > 0.0 && push_distance > 0.0 &&
        noise_scale > 0.0)) {
    throw std::invalid_argument("deadlock parameters must be positive");
  }
}

std::vector<NominalState> reference_states(const TrackerBank& bank) {
  std::vector<NominalState> out(static_cast<std::size_t>(bank.size()));
  for (UavId i = 0; i < bank.size(); ++i) {
    if (!bank[i].candidates.empty()) out[static_cast<std::size_t>(i)] = bank[i].candidates.front().initial_state;
  }
  return out;
}

namespace {

double target_distance(UavId i, const std::vector<NominalState>& s, const std::vector<std::optional<Vec3>>& t) {
  const auto& tgt = t.at(static_cast<std::size_t>(i));
  return tgt ? (*tgt - s[static_cast<std::size_t>(i)].position).norm() : 0.0;
}

}  // namespace

std::vector<UavId> stalled(const std::vector<NominalState>& states, const std::vector<std::optional<Vec3>>& targets,
                           const DeadlockConfig& cfg) {
  std::vector<UavId> out;
  for (UavId i = 0; i < static_cast<int>(states.size()); ++i) {
    if (states[static_cast<std::size_t>(i)].velocity.norm() < cfg.velocity_threshold &&
        target_distance(i, states, targets) > cfg.target_tolerance) {
      out.push_back(i);
    }
  }
  return out;
}

bool detect(const TrackerBank& bank, const std::vector<std::optional<Vec3>>& targets, const DeadlockConfig& cfg) {
  const auto states = reference_states(bank);
  bool away = false;
  for (UavId i = 0; i < static_cast<int>(states.size()); ++i) {
    if (states[static_cast<std::size_t>(i)].velocity.norm() >= cfg.velocity_threshold) return false;
    if (target_distance(i, states, targets) > cfg.target_tolerance) away = true;
  }
  return away;
}

bool should_make_room(UavId i, UavId j, const std::vector<NominalState>& states,
                      const std::vector<std::optional<Vec3>>& targets, const DeadlockConfig& cfg, double d_hat_min) {
  if (i == j) return false;
  const NominalState& si = states.at(static_cast<std::size_t>(i));
  const NominalState& sj = states.at(static_cast<std::size_t>(j));
  const Vec3 rel = sj.position - si.position;
  if (rel.norm() > cfg.make_room_radius) return false;
  if (target_distance(j, states, targets) < target_distance(i, states, targets)) return false;
  const bool toward = si.velocity.dot(rel) > 0.0;
  bool between = false;
  if (const auto& tj = targets.at(static_cast<std::size_t>(j))) {
    const Vec3 seg = *tj - sj.position;
    const double len2 = seg.squaredNorm();
    if (len2 > 0.0) {
      const double s = (si.position - sj.position).dot(seg) / len2;
      if (s >= 0.0 && s <= 1.0) {
        between = (si.position - (sj.position + s * seg)).norm() <= d_hat_min;
      }
    }
  }
  return toward || between;
}

std::optional<IntermediateTarget> make_room(UavId i, const std::vector<NominalState>& states,
                                            const std::vector<std::optional<Vec3>>& targets,
                                            const DeadlockConfig& cfg, double d_hat_min, std::mt19937_64& rng) {
  const Vec3& pi = states.at(static_cast<std::size_t>(i)).position;
  UavId best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (UavId j = 0; j < static_cast<int>(states.size()); ++j) {
    if (!should_make_room(i, j, states, targets, cfg, d_hat_min)) continue;
    const double d = (states[static_cast<std::size_t>(j)].position - pi).norm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  if (best < 0) return std::nullopt;
  Vec3 away = pi - states[static_cast<std::size_t>(best)].position;
  away = away.norm() > 1e-12 ? Vec3(away.normalized()) : Vec3::UnitX();
  std::uniform_real_distribution<double> u(-cfg.noise_scale, cfg.noise_scale);
  const Vec3 noise(u(rng), u(rng), u(rng));
  return IntermediateTarget{i, pi + cfg.push_distance * away + noise, true};
}

double right_side_weight(UavId i, UavId j, const std::vector<NominalState>& states, const OptimizationConfig& cfg) {
  const NominalState& si = states.at(static_cast<std::size_t>(i));
  const Vec3 rel = states.at(static_cast<std::size_t>(j)).position - si.position;
  const Vec3& h = si.velocity;
  if (h.head<2>().norm() < 1e-3) return cfg.soft_weight_base;
  const double cross_z = h.x() * rel.y() - h.y() * rel.x();
  return cross_z < 0.0 ? cfg.soft_weight_right : cfg.soft_weight_base;
}

}  // namespace mlr
