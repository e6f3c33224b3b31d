#include "mlr/planning.hpp"

#include <doctest.h>

using namespace mlr;

namespace {

OptimizationConfig identity_theta() {
  OptimizationConfig c;
  c.theta = Vec3::Ones();
  return c;
}

TrackerBank hover_bank(const std::vector<Vec3>& positions, RoundIndex start_round, const HorizonConfig& hc) {
  std::vector<ReferenceTrajectory> ts;
  for (const auto& p : positions) ts.push_back(hover_trajectory(p, start_round, hc));
  return TrackerBank::from_trajectories(ts);
}

}  // namespace

TEST_CASE("bvc halfspace between two hovering UAVs") {
  const auto cfg = identity_theta();
  const auto own = hover_trajectory(Vec3(0, 0, 1), 0, cfg.horizon);
  const auto other = hover_trajectory(Vec3(1, 0, 1), 0, cfg.horizon);

  auto hs = build_bvc(own, {other}, 1, true, cfg);
  REQUIRE(hs.size() == static_cast<std::size_t>(cfg.bvc_steps));
  for (const auto& h : hs) {
    CHECK((h.normal - Vec3(1, 0, 0)).norm() < 1e-12);
    CHECK(h.rhs == doctest::Approx(0.625));
    CHECK_FALSE(h.relaxed);
    // x <= 0.375 is the boundary
    CHECK(h.margin(Vec3(0.375, 0, 1), cfg.theta) == doctest::Approx(0.0).scale(1.0));
    CHECK(h.margin(Vec3(0.38, 0, 1), cfg.theta) < 0.0);
  }
  CHECK(hs.front().time_index == 1);
  CHECK(hs.back().time_index == cfg.bvc_steps);

  hs = build_bvc(own, {other}, 1, false, cfg);
  CHECK(hs[0].rhs == doctest::Approx(0.25));
  CHECK(hs[0].relaxed);
  CHECK(hs[0].margin(Vec3(0.75, 0, 1), cfg.theta) == doctest::Approx(0.0).scale(1.0));

  const auto other2 = hover_trajectory(Vec3(0, 1, 1), 0, cfg.horizon);
  CHECK(build_bvc(own, {other, other2}, 1, true, cfg).size() == static_cast<std::size_t>(2 * cfg.bvc_steps));

  CHECK_THROWS_AS(build_bvc(own, {own}, 1, true, cfg), std::domain_error);
  CHECK_THROWS(build_bvc(own, {}, 1, true, cfg));
}

TEST_CASE("downwash scaling enters the normal") {
  OptimizationConfig cfg;  // theta = (1,1,2)
  const auto own = hover_trajectory(Vec3(0, 0, 1), 0, cfg.horizon);
  const auto other = hover_trajectory(Vec3(0, 0, 2), 0, cfg.horizon);
  const auto hs = build_bvc(own, {other}, 1, true, cfg);
  // scaled gap is 0.5, so rhs = (0.25 + 0.5) / 2
  CHECK(hs[0].rhs == doctest::Approx(0.375));
  CHECK(hs[0].margin(Vec3(0, 0, 1), cfg.theta) == doctest::Approx(0.125));
}

TEST_CASE("a UAV at its target stays put") {
  OptimizationConfig cfg;
  const auto bank = hover_bank({Vec3(0, 0, 1)}, 4, cfg.horizon);
  PlanningRequest req{0, 5, 1, Vec3(0, 0, 1), {0}, false, {}};
  const auto pb = build_problem(req, bank, cfg);
  CHECK(pb.halfspaces.empty());
  const auto r = solve_problem(pb);
  REQUIRE(r.trajectory);
  CHECK(r.solution.x.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(r.trajectory->metadata == TrajectoryMetadata{5, 1});
  CHECK(r.trajectory->start_round == 5);
  CHECK(verify_candidate(pb.shifted_candidate, pb));
}

TEST_CASE("planned trajectory moves toward the target and respects every constraint") {
  OptimizationConfig cfg;
  const auto bank = hover_bank({Vec3(-1, 0, 1), Vec3(1, 0.5, 1)}, 0, cfg.horizon);
  PlanningRequest req{0, 1, 2, Vec3(-1, 1.5, 1.5), {0, 1}, false, {}};
  const auto pb = build_problem(req, bank, cfg);
  const auto r = solve_problem(pb);
  REQUIRE(r.trajectory);
  const auto& t = *r.trajectory;
  CHECK(verify_candidate(t, pb, 1e-8));
  CHECK(terminal_rest(terminal_state(t), 1e-9));
  const double d0 = (t.initial_state.position - req.target).norm();
  const double d1 = (terminal_state(t).position - req.target).norm();
  CHECK(d1 < 0.5 * d0);
  // the state box is imposed on the box grid
  for (int i = 1; i <= cfg.box_steps; ++i) {
    const auto s = sample(t, i * cfg.box_sampling_time);
    CHECK(cfg.state_box.position.contains(s.position, 1e-8));
    CHECK(cfg.state_box.velocity.contains(s.velocity, 1e-8));
    CHECK(cfg.state_box.acceleration.contains(s.acceleration, 1e-8));
  }
  for (const auto& h : pb.halfspaces) {
    CHECK(h.margin(sample(t, h.time_index * cfg.bvc_sampling_time).position, cfg.theta) >= -1e-8);
  }
}

TEST_CASE("distant neighbors do not change the optimum") {
  OptimizationConfig cfg;
  const auto bank = hover_bank({Vec3(-1.5, -1.5, 1), Vec3(1.5, 1.5, 2)}, 0, cfg.horizon);
  PlanningRequest req{0, 1, 1, Vec3(-1.2, -1.4, 1.2), {0}, false, {}};
  const auto pb = build_problem(req, bank, cfg);
  auto plain = pb.qp;
  const int bvc_rows = static_cast<int>(pb.halfspaces.size());
  REQUIRE(bvc_rows > 0);
  plain.ineq_matrix.conservativeResize(plain.num_ineq() - bvc_rows, Eigen::NoChange);
  plain.ineq_rhs.conservativeResize(plain.num_ineq() - bvc_rows);
  const auto a = qp::solve(pb.qp);
  const auto b = qp::solve(plain);
  REQUIRE(a.optimal());
  REQUIRE(b.optimal());
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("soft slack only tightens the hard halfspaces") {
  OptimizationConfig cfg;
  const auto bank = hover_bank({Vec3(-0.6, 0, 1), Vec3(0.6, 0, 1)}, 0, cfg.horizon);
  PlanningRequest hard{0, 1, 1, Vec3(1.2, 0, 1), {0, 1}, false, {}};
  PlanningRequest soft = hard;
  soft.soft = true;
  const auto hp = build_problem(hard, bank, cfg);
  const auto sp = build_problem(soft, bank, cfg);
  CHECK(sp.qp.dimension() == hp.qp.dimension() + 1);
  CHECK(sp.slack_index[1] == hp.qp.dimension());
  CHECK(sp.slack_index[0] == -1);
  const auto s = qp::solve(sp.qp);
  REQUIRE(s.optimal());
  const double eps = s.x[sp.slack_index[1]];
  CHECK(eps >= -1e-12);
  const auto t = extract_trajectory(sp, s.x);
  // the jerks alone are feasible for the hard program
  CHECK(verify_candidate(t, hp, 1e-8));
  for (const auto& h : sp.halfspaces) {
    CHECK(h.margin(sample(t, h.time_index * cfg.bvc_sampling_time).position, cfg.theta) >= eps - 1e-8);
  }
}

TEST_CASE("verify_candidate") {
  OptimizationConfig cfg;
  const auto bank = hover_bank({Vec3(0, 0, 1)}, 0, cfg.horizon);
  const auto pb = build_problem({0, 1, 1, Vec3(1, 1, 1), {0}, false, {}}, bank, cfg);
  CHECK(verify_candidate(pb.shifted_candidate, pb));

  auto fast = pb.shifted_candidate;
  fast.jerks[0] = Vec3(10, 0, 0);  // v after 0.2 s stays within limits, position drifts, no rest
  CHECK_FALSE(verify_candidate(fast, pb));

  auto outside = pb.shifted_candidate;
  outside.initial_state.position.z() = 5.0;
  CHECK_FALSE(verify_candidate(outside, pb));

  auto late = pb.shifted_candidate;
  late.start_round += 1;
  CHECK_FALSE(verify_candidate(late, pb));
}

TEST_CASE("build_problem preconditions") {
  OptimizationConfig cfg;
  auto bank = hover_bank({Vec3(0, 0, 1), Vec3(1, 0, 1)}, 0, cfg.horizon);
  PlanningRequest req{0, 1, 1, Vec3(0, 0, 1), {0}, false, {}};
  auto dep = bank;
  dep[1].deprecated = true;
  CHECK_THROWS_AS(build_problem(req, dep, cfg), std::logic_error);
  auto two = bank;
  two[0].candidates.push_back(two[0].candidates.front());
  two[0].candidates.back().metadata.calc_round = 1;
  CHECK_THROWS_AS(build_problem(req, two, cfg), std::logic_error);
  req.round = 3;
  CHECK_THROWS_AS(build_problem(req, bank, cfg), std::logic_error);
}

TEST_CASE("config validation") {
  OptimizationConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.bvc_sampling_time = 0.15;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.d_hat_min = 0.0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.theta.z() = -1.0;
  CHECK_THROWS(bad.validate());
}
