#include "mlr/nominal.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace mlr {
namespace {

int ratio_or_throw(double num, double den, const char* what) {
  const double r = num / den;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r)) {
    throw std::invalid_argument(std::string(what) + " must be a positive integer multiple");
  }
  return static_cast<int>(n);
}

}  // namespace

int HorizonConfig::steps_per_round() const { return ratio_or_throw(round_period, sampling_time, "T/T_s"); }

int HorizonConfig::input_steps() const { return horizon * steps_per_round(); }

void HorizonConfig::validate() const {
  if (!(round_period > 0.0) || !(sampling_time > 0.0)) throw std::invalid_argument("T and T_s must be positive");
  if (horizon < 1) throw std::invalid_argument("H must be at least 1");
  (void)steps_per_round();
}

NominalState propagate(const NominalState& s, const Vec3& u, double dt) {
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  NominalState out;
  out.position = s.position + s.velocity * dt + s.acceleration * (dt2 / 2.0) + u * (dt3 / 6.0);
  out.velocity = s.velocity + s.acceleration * dt + u * (dt2 / 2.0);
  out.acceleration = s.acceleration + u * dt;
  return out;
}

NominalState sample(const ReferenceTrajectory& traj, double tau) {
  NominalState s = traj.initial_state;
  if (tau <= 0.0) return s;
  const double ts = traj.sampling_time;
  for (const Vec3& u : traj.jerks) {
    if (tau <= ts) return propagate(s, u, tau);
    s = propagate(s, u, ts);
    tau -= ts;
  }
  if (tau > 0.0) s = propagate(s, Vec3::Zero(), tau);
  return s;
}

std::vector<Vec3> sample_positions(const ReferenceTrajectory& traj, double first, double step, int count) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out.push_back(sample(traj, first + i * step).position);
  return out;
}

ReferenceTrajectory shift(const ReferenceTrajectory& traj) {
  ReferenceTrajectory out = traj;
  const auto drop = static_cast<std::size_t>(traj.steps_per_round);
  NominalState s = traj.initial_state;
  for (std::size_t i = 0; i < drop; ++i) {
    const Vec3 u = i < traj.jerks.size() ? traj.jerks[i] : Vec3::Zero();
    s = propagate(s, u, traj.sampling_time);
  }
  out.initial_state = s;
  const std::size_t n = traj.jerks.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.jerks[i] = i + drop < n ? traj.jerks[i + drop] : Vec3::Zero();
  }
  out.start_round = traj.start_round + 1;
  return out;
}

ReferenceTrajectory advance_to(const ReferenceTrajectory& traj, RoundIndex round) {
  if (round < traj.start_round) throw std::invalid_argument("cannot shift a trajectory backwards in time");
  ReferenceTrajectory out = traj;
  while (out.start_round < round) out = shift(out);
  return out;
}

bool terminal_rest(const NominalState& s) {
  return s.velocity == Vec3::Zero() && s.acceleration == Vec3::Zero();
}

bool terminal_rest(const NominalState& s, double tol) {
  return s.velocity.cwiseAbs().maxCoeff() <= tol && s.acceleration.cwiseAbs().maxCoeff() <= tol;
}

NominalState terminal_state(const ReferenceTrajectory& traj) { return sample(traj, traj.duration()); }

ReferenceTrajectory hover_trajectory(const Vec3& position, RoundIndex start_round, const HorizonConfig& horizon,
                                     TrajectoryMetadata metadata) {
  ReferenceTrajectory t;
  t.start_round = start_round;
  t.initial_state.position = position;
  t.jerks.assign(static_cast<std::size_t>(horizon.input_steps()), Vec3::Zero());
  t.sampling_time = horizon.sampling_time;
  t.steps_per_round = horizon.steps_per_round();
  t.metadata = metadata;
  return t;
}

std::uint64_t content_hash(const ReferenceTrajectory& traj) {
  // FNV-1a over the raw bits
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  auto mix_vec = [&](const Vec3& v) {
    for (int d = 0; d < 3; ++d) mix(std::bit_cast<std::uint64_t>(v[d]));
  };
  mix(static_cast<std::uint64_t>(traj.start_round));
  mix(static_cast<std::uint64_t>(traj.metadata.calc_round));
  mix(static_cast<std::uint64_t>(traj.metadata.cu_id));
  mix_vec(traj.initial_state.position);
  mix_vec(traj.initial_state.velocity);
  mix_vec(traj.initial_state.acceleration);
  for (const Vec3& u : traj.jerks) mix_vec(u);
  return h;
}

}  // namespace mlr
