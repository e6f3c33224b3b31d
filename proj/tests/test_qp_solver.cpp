#include "mlr/qp_solver.hpp"
#include "mlr/simd/kernels.hpp"
#include "support/qp_oracle.hpp"

#include <doctest.h>

#include <random>

using namespace mlr;
using qp::QpStatus;

TEST_CASE("one-dimensional bound") {
  qp::QuadraticProgram p(1);
  p.hessian(0, 0) = 2.0;
  p.add_inequality(Eigen::RowVectorXd::Ones(1), 1.0);
  const auto s = qp::solve(p);
  REQUIRE(s.status == QpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.ineq_multipliers[0] == doctest::Approx(2.0));
}

TEST_CASE("equality constrained least squares") {
  // (x1 - 2)^2 + x2^2 s.t. x1 + x2 = 1
  qp::QuadraticProgram p(2);
  p.hessian = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  p.linear << -4.0, 0.0;
  p.add_equality(Eigen::RowVector2d(1.0, 1.0), 1.0);
  const auto s = qp::solve(p);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(s.x[1] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(s.objective + 4.0 == doctest::Approx(0.5));  // constant term dropped
}

TEST_CASE("contradicting constraints are infeasible") {
  qp::QuadraticProgram p(1);
  p.hessian(0, 0) = 2.0;
  p.add_inequality(Eigen::RowVectorXd::Ones(1), 1.0);
  p.add_inequality(-Eigen::RowVectorXd::Ones(1), 0.0);
  CHECK(qp::solve(p).status == QpStatus::Infeasible);

  qp::QuadraticProgram b(2);
  b.hessian.setIdentity();
  b.lower << 1.0, -1.0;
  b.upper << 0.0, 1.0;
  CHECK(qp::solve(b).status == QpStatus::Infeasible);

  qp::QuadraticProgram e(2);
  e.hessian.setIdentity();
  e.add_equality(Eigen::RowVector2d(1.0, 1.0), 1.0);
  e.add_equality(Eigen::RowVector2d(2.0, 2.0), 3.0);
  CHECK(qp::solve(e).status == QpStatus::Infeasible);
}

TEST_CASE("redundant equalities are tolerated") {
  qp::QuadraticProgram e(2);
  e.hessian.setIdentity();
  e.add_equality(Eigen::RowVector2d(1.0, 1.0), 1.0);
  e.add_equality(Eigen::RowVector2d(2.0, 2.0), 2.0);
  const auto s = qp::solve(e);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(0.5));
}

TEST_CASE("box bounds") {
  qp::QuadraticProgram p(3);
  p.hessian.setIdentity();
  p.linear << -5.0, 5.0, 0.1;
  p.lower << -1.0, -1.0, -1.0;
  p.upper << 1.0, 1.0, 1.0;
  const auto s = qp::solve(p);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.x[1] == doctest::Approx(-1.0));
  CHECK(s.x[2] == doctest::Approx(-0.1));
  CHECK(s.upper_multipliers[0] == doctest::Approx(4.0));
  CHECK(s.lower_multipliers[1] == doctest::Approx(4.0));
}

TEST_CASE("malformed programs are rejected") {
  qp::QuadraticProgram p(2);
  p.hessian(0, 1) = 1.0;
  CHECK_THROWS_AS(qp::solve(p), std::invalid_argument);
  qp::QuadraticProgram q(2);
  q.linear.resize(3);
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("semidefinite Hessian with constraints") {
  // minimize x subject to x >= 2 (P = 0)
  qp::QuadraticProgram p(1);
  p.linear[0] = 1.0;
  p.add_inequality(Eigen::RowVectorXd::Ones(1), 2.0);
  const auto s = qp::solve(p);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("random feasible programs satisfy KKT") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 30;
    const int n_eq = trial % 3;
    const int n_in = (trial * 7) % 40;
    auto r = testing::random_feasible_qp(rng, n, std::min(n_eq, n - 1), n_in, trial % 2 == 0);
    const auto s = qp::solve(r.qp);
    CAPTURE(trial);
    REQUIRE(s.optimal());
    CHECK(qp::kkt_residuals(r.qp, s).max() <= 1e-6);
  }
}

TEST_CASE("small programs match the dual gradient oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 6;
    auto r = testing::random_feasible_qp(rng, n, trial % 2 == 0 && n > 1 ? 1 : 0, 2 + trial % 5, trial % 3 == 0);
    const auto s = qp::solve(r.qp);
    REQUIRE(s.optimal());
    const Eigen::VectorXd ref = testing::dual_gradient_oracle(r.qp);
    CAPTURE(trial);
    CHECK((s.x - ref).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("solution does not depend on the SIMD backend beyond rounding") {
  std::mt19937_64 rng(13);
  auto r = testing::random_feasible_qp(rng, 40, 2, 80, true);
  const auto before = simd::active_backend();
  simd::set_backend(simd::Backend::Scalar);
  const auto a = qp::solve(r.qp);
  simd::set_backend(before);
  const auto b = qp::solve(r.qp);
  REQUIRE(a.optimal());
  REQUIRE(b.optimal());
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-9);
}
