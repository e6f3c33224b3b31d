#pragma once

// Random convex QPs and an independent reference solver for them.
//
// The reference runs accelerated projected gradient on the dual: for a
// strictly convex program the dual variables of inequalities only need to
// stay nonnegative, so the projection is a clamp.

#include "mlr/qp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <random>

namespace mlr::testing {

struct RandomQp {
  qp::QuadraticProgram qp;
  Eigen::VectorXd feasible_point;
};

inline RandomQp random_feasible_qp(std::mt19937_64& rng, int n, int n_eq, int n_in, bool bounds) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto randn = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
  };
  RandomQp out;
  out.qp = qp::QuadraticProgram(n);
  const Eigen::MatrixXd b = randn(n, n);
  out.qp.hessian = b.transpose() * b + 0.5 * Eigen::MatrixXd::Identity(n, n);
  out.qp.linear = randn(n, 1).col(0) * 3.0;
  const Eigen::VectorXd x0 = randn(n, 1).col(0);
  out.feasible_point = x0;
  if (n_eq > 0) {
    out.qp.eq_matrix = randn(n_eq, n);
    out.qp.eq_rhs = out.qp.eq_matrix * x0;
  }
  if (n_in > 0) {
    out.qp.ineq_matrix = randn(n_in, n);
    Eigen::VectorXd slack(n_in);
    for (int i = 0; i < n_in; ++i) slack[i] = u(rng);
    out.qp.ineq_rhs = out.qp.ineq_matrix * x0 - slack;
  }
  if (bounds) {
    for (int i = 0; i < n; ++i) {
      out.qp.lower[i] = x0[i] - 0.2 - u(rng);
      out.qp.upper[i] = x0[i] + 0.2 + u(rng);
    }
  }
  return out;
}

// Dual accelerated projected gradient. Returns the primal point.
inline Eigen::VectorXd dual_gradient_oracle(const qp::QuadraticProgram& p, int iterations = 400000) {
  const int n = p.dimension();
  // Stack every constraint as a row of G x >= h (equalities: free dual sign).
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  std::vector<bool> free;
  for (int i = 0; i < p.num_eq(); ++i) {
    rows.push_back(p.eq_matrix.row(i));
    rhs.push_back(p.eq_rhs[i]);
    free.push_back(true);
  }
  for (int i = 0; i < p.num_ineq(); ++i) {
    rows.push_back(p.ineq_matrix.row(i));
    rhs.push_back(p.ineq_rhs[i]);
    free.push_back(false);
  }
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e[i] = 1.0;
    if (std::isfinite(p.lower[i])) {
      rows.push_back(e);
      rhs.push_back(p.lower[i]);
      free.push_back(false);
    }
    if (std::isfinite(p.upper[i])) {
      rows.push_back(-e);
      rhs.push_back(-p.upper[i]);
      free.push_back(false);
    }
  }
  const int m = static_cast<int>(rows.size());
  Eigen::MatrixXd gm(m, n);
  Eigen::VectorXd h(m);
  for (int i = 0; i < m; ++i) {
    gm.row(i) = rows[static_cast<std::size_t>(i)];
    h[i] = rhs[static_cast<std::size_t>(i)];
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(p.hessian);
  const Eigen::MatrixXd pinv_gt = llt.solve(gm.transpose());
  const Eigen::MatrixXd hess = gm * pinv_gt;  // dual Hessian
  const Eigen::VectorXd pinv_q = llt.solve(p.linear);
  const double lip = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hess).eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(lip, 1e-12);
  // dual: max  h'l - 1/2 (G'l - q)' P^-1 (G'l - q); gradient h - G P^-1 (G'l - q)
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(m), y = lam, prev = lam;
  double t = 1.0;
  auto project = [&](Eigen::VectorXd& v) {
    for (int i = 0; i < m; ++i)
      if (!free[static_cast<std::size_t>(i)]) v[i] = std::max(v[i], 0.0);
  };
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd grad = h - (hess * y - gm * pinv_q);
    Eigen::VectorXd next = y + step * grad;
    project(next);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // restart when momentum points uphill
    if ((next - lam).dot(y - next) > 0.0) {
      t = 1.0;
      y = next;
    } else {
      y = next + ((t - 1.0) / tn) * (next - lam);
      t = tn;
    }
    prev = lam;
    lam = next;
  }
  return pinv_gt * lam - pinv_q;
}

}  // namespace mlr::testing
