#include "mlr/scenario.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace mlr;

TEST_CASE("built-ins validate") {
  for (const auto& name : builtin_names()) {
    for (int n : {2, 8}) {
      const auto sc = builtin_scenario(name, n, 2, 3);
      CHECK_NOTHROW(sc.validate());
      CHECK(sc.num_uavs == n);
      CHECK(static_cast<int>(sc.initial_positions.size()) == n);
    }
  }
  CHECK_THROWS(builtin_scenario("nope", 4, 1, 0));
}

TEST_CASE("scenario files") {
  const auto sc = parse_scenario(R"(
# two UAVs swapping
base = hover
n_uavs = 2
n_cus = 1
rounds = 40
trigger = rr
loss_prob = 0.1
jam = 5:10:cu1
initial = -1,0,1; 1,0,1
clear_targets = true
targets@0 = 1,0,1; -1,0,1
horizon = 10
theta = 1,1,2
)");
  CHECK(sc.num_uavs == 2);
  CHECK(sc.rounds == 40);
  CHECK(sc.trigger == TriggerKind::RoundRobin);
  CHECK(sc.loss_prob == doctest::Approx(0.1));
  REQUIRE(sc.jams.size() == 1);
  CHECK(sc.jams[0].start == 5);
  CHECK(sc.optimization.horizon.horizon == 10);
  CHECK(sc.optimization.theta == Vec3(1, 1, 2));
  CHECK(sc.targets_at(20)[0] == Vec3(1, 0, 1));
  CHECK_THROWS(parse_scenario("bogus_key = 1\n"));
  CHECK_THROWS(parse_scenario("base = hover\nn_uavs = 2\ninitial = 0,0,1; 0.1,0,1\n"));
}

TEST_CASE("validation catches bad geometry") {
  auto sc = builtin_scenario("hover", 2, 1, 0);
  sc.initial_positions[1] = sc.initial_positions[0] + Vec3(0.1, 0, 0);
  CHECK_THROWS(sc.validate());
  sc = builtin_scenario("hover", 2, 1, 0);
  sc.initial_positions[0] = Vec3(0, 0, 50);
  CHECK_THROWS(sc.validate());
  sc = builtin_scenario("hover", 2, 1, 0);
  sc.loss_prob = 1.5;
  CHECK_THROWS(sc.validate());
}

TEST_CASE("assignment is optimal") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> a, b;
    for (int i = 0; i < 6; ++i) {
      a.emplace_back(u(rng), u(rng), u(rng));
      b.emplace_back(u(rng), u(rng), u(rng));
    }
    auto cost = [&](const std::vector<int>& p) {
      double c = 0;
      for (std::size_t i = 0; i < p.size(); ++i) c += (a[i] - b[static_cast<std::size_t>(p[i])]).squaredNorm();
      return c;
    };
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    double best = cost(perm);
    while (std::next_permutation(perm.begin(), perm.end())) best = std::min(best, cost(perm));
    const auto got = assign_targets(a, b);
    auto sorted = got;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(cost(got) == doctest::Approx(best).epsilon(1e-12));
  }
}
