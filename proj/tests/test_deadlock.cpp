#include "mlr/deadlock.hpp"

#include <doctest.h>

using namespace mlr;

namespace {

NominalState at(const Vec3& p, const Vec3& v = Vec3::Zero()) { return {p, v, Vec3::Zero()}; }

TrackerBank bank_of(const std::vector<NominalState>& s) {
  HorizonConfig hc;
  std::vector<ReferenceTrajectory> ts;
  for (const auto& x : s) {
    auto t = hover_trajectory(x.position, 0, hc);
    t.initial_state = x;
    ts.push_back(t);
  }
  return TrackerBank::from_trajectories(ts);
}

}  // namespace

TEST_CASE("detection") {
  DeadlockConfig cfg;
  std::vector<NominalState> s{at(Vec3(0, 0, 1)), at(Vec3(1, 0, 1))};
  std::vector<std::optional<Vec3>> at_target{Vec3(0, 0, 1), Vec3(1, 0, 1)};
  CHECK_FALSE(detect(bank_of(s), at_target, cfg));
  std::vector<std::optional<Vec3>> one_away{Vec3(0, 0, 1), Vec3(2, 0, 1)};
  CHECK(detect(bank_of(s), one_away, cfg));
  DeadlockConfig strict = cfg;
  strict.velocity_threshold = 0.01;
  s[1].velocity = Vec3(0.5, 0, 0);
  CHECK_FALSE(detect(bank_of(s), one_away, strict));
  CHECK(stalled({at(Vec3(0, 0, 1)), at(Vec3(1, 0, 1))}, one_away, cfg) == std::vector<UavId>{1});
}

TEST_CASE("head-on pair: each makes room for the other") {
  DeadlockConfig cfg;
  std::vector<NominalState> s{at(Vec3(-0.2, 0, 1)), at(Vec3(0.2, 0, 1))};
  std::vector<std::optional<Vec3>> t{Vec3(1, 0, 1), Vec3(-1, 0, 1)};
  CHECK(should_make_room(0, 1, s, t, cfg, 0.25));
  CHECK(should_make_room(1, 0, s, t, cfg, 0.25));
  std::mt19937_64 rng(1);
  const auto it = make_room(0, s, t, cfg, 0.25, rng);
  REQUIRE(it);
  CHECK(it->active);
  // Away from UAV 1 (towards -x) by push_distance, up to the noise.
  const Vec3 d = it->position - s[0].position;
  CHECK(d.x() <= -cfg.push_distance + cfg.noise_scale);
  CHECK(std::abs(d.y()) <= cfg.noise_scale);
}

TEST_CASE("no reason to make room") {
  DeadlockConfig cfg;
  std::mt19937_64 rng(1);
  // Isolated.
  std::vector<NominalState> far{at(Vec3(-1.5, 0, 1)), at(Vec3(1.5, 0, 1))};
  std::vector<std::optional<Vec3>> t{Vec3(-1, 1, 1), Vec3(1, 1, 1)};
  CHECK_FALSE(make_room(0, far, t, cfg, 0.25, rng));
  // Close, but i is further from its target than j and sits beside j's path.
  std::vector<NominalState> s{at(Vec3(0, 0.6, 1)), at(Vec3(0, 0, 1))};
  std::vector<std::optional<Vec3>> t2{Vec3(0, 1.5, 1), Vec3(1, 0, 1)};
  CHECK_FALSE(should_make_room(0, 1, s, t2, cfg, 0.25));
  CHECK_FALSE(make_room(0, s, t2, cfg, 0.25, rng));
  // i closer to its target than j, not between, not moving: none.
  std::vector<std::optional<Vec3>> t3{Vec3(0, 0.7, 1), Vec3(1, 0, 1)};
  CHECK_FALSE(should_make_room(0, 1, s, t3, cfg, 0.25));
}

TEST_CASE("moving toward a neighbor qualifies") {
  DeadlockConfig cfg;
  std::vector<NominalState> s{at(Vec3(0, 0, 1), Vec3(0.1, 0, 0)), at(Vec3(0.5, 0.5, 1))};
  std::vector<std::optional<Vec3>> t{Vec3(0, -0.5, 1), Vec3(-1, 1, 1)};
  CHECK(should_make_room(0, 1, s, t, cfg, 0.25));
  s[0].velocity = Vec3(-0.1, 0, 0);
  CHECK_FALSE(should_make_room(0, 1, s, t, cfg, 0.25));
}

TEST_CASE("right side weighting") {
  OptimizationConfig cfg;
  std::vector<NominalState> s{at(Vec3(0, 0, 1), Vec3(1, 0, 0)), at(Vec3(0, 1, 1)), at(Vec3(0, -1, 1))};
  CHECK(right_side_weight(0, 1, s, cfg) == cfg.soft_weight_base);
  CHECK(right_side_weight(0, 2, s, cfg) == cfg.soft_weight_right);
  s[0].velocity = Vec3::Zero();
  CHECK(right_side_weight(0, 2, s, cfg) == cfg.soft_weight_base);
}

TEST_CASE("config validation") {
  DeadlockConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.push_distance = 0.0;
  CHECK_THROWS(cfg.validate());
}
