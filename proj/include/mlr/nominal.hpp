#pragma once

// Third-order integrator nominal model and piecewise-constant-jerk
// reference trajectories.
//
// Time convention: a trajectory computed in round k has start_round k and its
// initial_state is the nominal state at absolute time (k + 1) * T, the moment
// a UAV adopts it. Jerk step s acts on [s * T_s, (s + 1) * T_s) measured from
// that instant; past the last step the jerk is zero.

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <vector>

namespace mlr {

using Vec3 = Eigen::Vector3d;
using RoundIndex = std::int64_t;
using UavId = int;
using CuId = int;

struct NominalState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();

  bool operator==(const NominalState&) const = default;
};

struct TrajectoryMetadata {
  RoundIndex calc_round = 0;
  CuId cu_id = 0;  // 0 marks the initial hover trajectory

  auto operator<=>(const TrajectoryMetadata&) const = default;
};

// Horizon bookkeeping shared by every trajectory of a run.
struct HorizonConfig {
  double round_period = 0.2;   // T
  double sampling_time = 0.2;  // T_s
  int horizon = 15;            // H, in rounds

  int steps_per_round() const;  // T / T_s
  int input_steps() const;      // h_s = H * T / T_s
  double span() const { return horizon * round_period; }
  void validate() const;
};

struct ReferenceTrajectory {
  RoundIndex start_round = 0;
  NominalState initial_state;
  std::vector<Vec3> jerks;  // length h_s
  double sampling_time = 0.2;
  int steps_per_round = 1;
  TrajectoryMetadata metadata;

  double duration() const { return static_cast<double>(jerks.size()) * sampling_time; }
  bool operator==(const ReferenceTrajectory&) const = default;
};

NominalState propagate(const NominalState& state, const Vec3& jerk, double dt);

// State tau seconds after initial_state. Beyond the horizon the jerk is zero,
// so a trajectory ending at rest holds its final state.
NominalState sample(const ReferenceTrajectory& traj, double tau);

// Positions at tau = first + i * step for i in [0, count).
std::vector<Vec3> sample_positions(const ReferenceTrajectory& traj, double first, double step, int count);

// One-round shift: drop the first T/T_s steps, advance the initial state by T,
// pad with zero jerk.
ReferenceTrajectory shift(const ReferenceTrajectory& traj);

// Shift repeatedly until start_round reaches `round`; no-op when already there.
ReferenceTrajectory advance_to(const ReferenceTrajectory& traj, RoundIndex round);

// True iff velocity and acceleration are exactly zero.
bool terminal_rest(const NominalState& state);
bool terminal_rest(const NominalState& state, double tol);

NominalState terminal_state(const ReferenceTrajectory& traj);

ReferenceTrajectory hover_trajectory(const Vec3& position, RoundIndex start_round, const HorizonConfig& horizon,
                                     TrajectoryMetadata metadata = {});

// Content hash over start round, state and inputs (bitwise). Equal
// trajectories hash equal; used for trace digests.
std::uint64_t content_hash(const ReferenceTrajectory& traj);

}  // namespace mlr
