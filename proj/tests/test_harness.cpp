#include "mlr/harness.hpp"

#include <doctest.h>

#include <algorithm>

using namespace mlr;
using namespace mlr::harness;

namespace {

Trace two_still(double gap) {
  Trace t;
  t.scenario = builtin_scenario("hover", 2, 1, 0);
  t.grid_per_round = 1;
  for (RoundIndex k = 0; k < 3; ++k) {
    for (UavId i = 0; i < 2; ++i) {
      for (int sub = 0; sub < kFineSteps; ++sub) {
        const Vec3 p(i * gap, 0, 1);
        t.samples.push_back({k, sub, i, p, p, 0.0, 0.0});
      }
    }
  }
  return t;
}

bool has_event(const Trace& t, const std::string& kind) {
  return std::any_of(t.events.begin(), t.events.end(), [&](const Event& e) { return e.kind == kind; });
}

}  // namespace

TEST_CASE("collision checks on fixed positions") {
  const Vec3 theta(1, 1, 2);
  CHECK(check_discrete_collisions(two_still(1.0), theta, 0.25).empty());
  const auto v = check_discrete_collisions(two_still(0.2), theta, 0.25);
  CHECK(v.size() == 3);  // one per round on the T_c grid
  CHECK(v[0].distance == doctest::Approx(0.2));
  CHECK(check_physical_distance(two_still(1.0), 0.05).empty());
  CHECK(check_physical_distance(two_still(0.1), 0.0).size() == 3 * kFineSteps);
  CHECK(min_reference_distance(two_still(0.2), true) == doctest::Approx(0.2));
}

TEST_CASE("continuous margin estimate") {
  MarginModel still;
  still.velocity_max = still.acceleration_max = still.jerk_max = Vec3::Zero();
  CHECK(estimate_continuous_margin(still, 200, 1).estimate < 1e-12);

  MarginModel cv;
  cv.acceleration_max = cv.jerk_max = Vec3::Zero();
  CHECK(deviation_bound(cv) == 0.0);
  const double chord = std::min(2.0 * cv.d_hat_min, (2.0 * cv.velocity_max.cwiseQuotient(cv.theta)).norm() * cv.step);
  const auto e = estimate_continuous_margin(cv, 5000, 2);
  CHECK(e.admissible > 0);
  CHECK(e.estimate > 0.0);
  CHECK(e.estimate <= chord_bound(cv.d_hat_min, chord) + 1e-12);

  const auto full = estimate_continuous_margin(MarginModel{}, 5000, 3);
  CHECK(full.estimate <= cv.d_hat_min);
  CHECK(chord_bound(0.25, 0.0) == 0.0);
  CHECK(chord_bound(0.25, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("a UAV at its target stays put") {
  auto sc = builtin_scenario("hover", 1, 1, 0);
  sc.rounds = 30;
  const auto tr = run(sc);
  REQUIRE_FALSE(tr.aborted);
  for (const auto& s : tr.samples) CHECK((s.reference - sc.initial_positions[0]).norm() == 0.0);
  const auto m = metrics(tr, 0.05);
  CHECK(m.all_settled);
  CHECK(m.total_settle == 0);
}

TEST_CASE("runs are deterministic") {
  auto sc = builtin_scenario("circle-exchange", 4, 2, 7);
  sc.rounds = 40;
  sc.loss_prob = 0.2;
  const auto a = run(sc);
  const auto b = run(sc, RunOptions{true});
  CHECK(samples_csv(a) == samples_csv(b));
  CHECK(events_jsonl(a) == events_jsonl(b));
  CHECK(rounds_jsonl(a) == rounds_jsonl(b));
}

TEST_CASE("jamming exercises recovery and keeps the oracles clean") {
  auto sc = builtin_scenario("circle-exchange", 6, 3, 1);
  sc.rounds = 60;
  sc.jams.push_back(parse_jam("5:15:cus", sc.schedule()));
  const auto tr = run(sc);
  CHECK(has_event(tr, "mlr_entry"));
  CHECK(has_event(tr, "mlr_exit"));
  CHECK(check_theorem_oracles(tr).clean());
  CHECK(check_discrete_collisions(tr, sc.optimization.theta, sc.optimization.d_hat_min).empty());
}

TEST_CASE("without recovery, stale trackers show up") {
  int broken = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto sc = builtin_scenario("circle-exchange", 8, 3, seed);
    sc.rounds = 60;
    sc.loss_recovery = false;
    sc.jams.push_back(parse_jam("5:15:cus", sc.schedule()));
    const auto rep = check_theorem_oracles(run(sc));
    if (rep.aborted || rep.lemma1 > 0 || rep.lemma2 > 0) ++broken;
  }
  CHECK(broken > 0);
}

TEST_CASE("trace export") {
  auto sc = builtin_scenario("hover", 2, 1, 0);
  sc.rounds = 3;
  const auto tr = run(sc);
  const auto csv = samples_csv(tr);
  CHECK(csv.rfind("round,sub,uav,ref_x,ref_y,ref_z,act_x,act_y,act_z,vel,target_dist\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 2 * tr.grid_per_round * kFineSteps);
  const auto m = metrics(tr, 0.05);
  CHECK(metrics_csv(m).rfind("round,dmin,dmax,min_pair_dist\n", 0) == 0);
}
