#include "mlr/nominal.hpp"

#include <doctest.h>

#include <random>

using namespace mlr;

namespace {

Vec3 rand_vec(std::mt19937_64& rng, double s = 1.0) {
  std::uniform_real_distribution<double> u(-s, s);
  return Vec3(u(rng), u(rng), u(rng));
}

ReferenceTrajectory random_trajectory(std::mt19937_64& rng, const HorizonConfig& hc) {
  ReferenceTrajectory t = hover_trajectory(rand_vec(rng), 3, hc, {3, 1});
  t.initial_state.velocity = rand_vec(rng);
  t.initial_state.acceleration = rand_vec(rng);
  for (auto& u : t.jerks) u = rand_vec(rng, 5.0);
  return t;
}

double max_diff(const NominalState& a, const NominalState& b) {
  return std::max({(a.position - b.position).cwiseAbs().maxCoeff(), (a.velocity - b.velocity).cwiseAbs().maxCoeff(),
                   (a.acceleration - b.acceleration).cwiseAbs().maxCoeff()});
}

}  // namespace

TEST_CASE("propagate closed form") {
  NominalState s;
  auto r = propagate(s, Vec3(6, 0, 0), 1.0);
  CHECK(r.position == Vec3(1, 0, 0));
  CHECK(r.velocity == Vec3(3, 0, 0));
  CHECK(r.acceleration == Vec3(6, 0, 0));

  NominalState c;
  c.position = Vec3(1, 0, 0);
  c.velocity = Vec3(2, 0, 0);
  r = propagate(c, Vec3::Zero(), 0.5);
  CHECK(r.position.x() == 2.0);
  CHECK(r.velocity.x() == 2.0);
  CHECK(r.acceleration.x() == 0.0);
}

TEST_CASE("propagate is a semigroup in dt") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    NominalState s{rand_vec(rng), rand_vec(rng), rand_vec(rng)};
    const Vec3 u = rand_vec(rng, 5.0);
    const auto once = propagate(s, u, 0.2);
    const auto twice = propagate(propagate(s, u, 0.1), u, 0.1);
    CHECK(max_diff(once, twice) < 1e-14);
  }
}

TEST_CASE("sample") {
  HorizonConfig hc;
  const auto hover = hover_trajectory(Vec3(0, 0, 1), 0, hc);
  for (double tau : {0.0, 0.1, 1.7, 3.0, 50.0}) {
    const auto s = sample(hover, tau);
    CHECK(s.position == Vec3(0, 0, 1));
    CHECK(terminal_rest(s));
  }

  std::mt19937_64 rng(2);
  const auto t = random_trajectory(rng, hc);
  NominalState s = t.initial_state;
  for (int k = 0; k < 5; ++k) s = propagate(s, t.jerks[static_cast<std::size_t>(k)], hc.sampling_time);
  CHECK(max_diff(sample(t, 5 * hc.sampling_time), s) < 1e-12);
}

TEST_CASE("a trajectory at rest holds its terminal state") {
  HorizonConfig hc;
  auto t = hover_trajectory(Vec3(0, 0, 1), 0, hc);
  // accelerate then brake symmetrically: +u, -2u, +u leaves v = a = 0
  t.jerks[0] = Vec3(1, 0, 0);
  t.jerks[1] = Vec3(-2, 0, 0);
  t.jerks[2] = Vec3(1, 0, 0);
  const auto end = terminal_state(t);
  CHECK(terminal_rest(end, 1e-12));
  CHECK(max_diff(sample(t, t.duration() + 10.0), end) < 1e-12);
}

TEST_CASE("shift") {
  HorizonConfig hc;
  const auto hover = hover_trajectory(Vec3(1, 2, 1), 4, hc, {4, 2});
  auto sh = shift(hover);
  CHECK(sh.start_round == 5);
  CHECK(sh.initial_state == hover.initial_state);
  CHECK(sh.jerks == hover.jerks);
  CHECK(sh.metadata == hover.metadata);

  HorizonConfig fine{0.2, 0.1, 2};  // T/T_s = 2, four steps
  auto t = hover_trajectory(Vec3::Zero(), 0, fine);
  REQUIRE(t.jerks.size() == 4);
  for (int i = 0; i < 4; ++i) t.jerks[static_cast<std::size_t>(i)] = Vec3::Constant(i + 1.0);
  sh = shift(t);
  CHECK(sh.jerks[0] == Vec3::Constant(3.0));
  CHECK(sh.jerks[1] == Vec3::Constant(4.0));
  CHECK(sh.jerks[2] == Vec3::Zero());
  CHECK(sh.jerks[3] == Vec3::Zero());
}

TEST_CASE("shift matches sampling the original one round later") {
  std::mt19937_64 rng(3);
  for (HorizonConfig hc : {HorizonConfig{}, HorizonConfig{0.2, 0.05, 6}}) {
    const auto t = random_trajectory(rng, hc);
    const auto sh = shift(t);
    const double span = (hc.horizon - 1) * hc.round_period;
    for (int i = 0; i <= 200; ++i) {
      const double tau = span * i / 200.0;
      CHECK(max_diff(sample(sh, tau), sample(t, tau + hc.round_period)) < 1e-12);
    }
    CHECK(advance_to(t, t.start_round + 2) == shift(shift(t)));
    CHECK_THROWS(advance_to(t, t.start_round - 1));
  }
}

TEST_CASE("terminal rest policies") {
  NominalState s;
  s.position = Vec3(4, 5, 6);
  CHECK(terminal_rest(s));
  s.velocity = Vec3(1e-12, 0, 0);
  CHECK_FALSE(terminal_rest(s));
  CHECK(terminal_rest(s, 1e-9));
}

TEST_CASE("horizon config") {
  HorizonConfig hc;
  CHECK(hc.steps_per_round() == 1);
  CHECK(hc.input_steps() == 15);
  CHECK(HorizonConfig{0.2, 0.05, 15}.input_steps() == 60);
  CHECK_THROWS(HorizonConfig({0.2, 0.15, 15}).validate());
  CHECK_THROWS(HorizonConfig({0.2, 0.2, 0}).validate());
}

TEST_CASE("content hash separates trajectories") {
  HorizonConfig hc;
  auto a = hover_trajectory(Vec3(0, 0, 1), 0, hc);
  auto b = a;
  CHECK(content_hash(a) == content_hash(b));
  b.jerks[3].x() = 1e-300;
  CHECK(content_hash(a) != content_hash(b));
  b = a;
  b.metadata.cu_id = 2;
  CHECK(content_hash(a) != content_hash(b));
}
