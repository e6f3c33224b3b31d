#pragma once

// Dense convex quadratic programming.
//
//   minimize   1/2 x' P x + q' x
//   subject to A_eq x  = b_eq
//              A_in x >= b_in
//              lower <= x <= upper        (infinite bounds are ignored)
//
// Solved with a dual active-set method (Goldfarb-Idnani). Primal feasibility
// of the active constraints holds to rounding error at termination, which is
// what the anti-collision guarantees lean on. P must be positive definite; a
// semidefinite P is regularized by a tiny multiple of the identity.

#include <Eigen/Core>

#include <string_view>

namespace mlr::qp {

struct QuadraticProgram {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  explicit QuadraticProgram(int dimension = 0);

  int dimension() const { return static_cast<int>(linear.size()); }
  int num_eq() const { return static_cast<int>(eq_rhs.size()); }
  int num_ineq() const { return static_cast<int>(ineq_rhs.size()); }

  // Append rows; matrices grow as needed.
  void add_equality(const Eigen::Ref<const Eigen::RowVectorXd>& row, double rhs);
  void add_inequality(const Eigen::Ref<const Eigen::RowVectorXd>& row, double rhs);

  double objective(const Eigen::VectorXd& x) const;
  // Throws std::invalid_argument on inconsistent dimensions or asymmetric P.
  void validate() const;
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

std::string_view to_string(QpStatus s);

struct SolverSettings {
  double tol = 1e-8;
  int max_iterations = 4000;
};

struct QpSolution {
  QpStatus status = QpStatus::MaxIterations;
  Eigen::VectorXd x;
  double objective = 0.0;
  // Lagrange multipliers, sign convention: P x + q = A_eq' y + A_in' z + l - u
  // with z, l, u >= 0.
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;
  Eigen::VectorXd lower_multipliers;
  Eigen::VectorXd upper_multipliers;
  int iterations = 0;

  bool optimal() const { return status == QpStatus::Optimal; }
};

QpSolution solve(const QuadraticProgram& qp, const SolverSettings& settings = {});

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double max() const;
};

KktResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol);

// Largest constraint violation of x (0 when feasible).
double max_violation(const QuadraticProgram& qp, const Eigen::VectorXd& x);

}  // namespace mlr::qp
