#include "mlr/qp_solver.hpp"

#include "mlr/simd/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mlr::qp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::span<const double> view(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

enum class Kind { Eq, Ineq, Lower, Upper };

// All constraints in the solver's canonical form n' x >= b (or = b), stored
// column-major so that every normal is contiguous.
struct ConstraintSet {
  int n = 0;
  int meq = 0;
  Eigen::MatrixXd normals;  // n x m
  Eigen::VectorXd rhs;
  Eigen::VectorXd norms;
  std::vector<Kind> kind;
  std::vector<int> source;  // row / variable index in the original program

  int size() const { return static_cast<int>(rhs.size()); }
};

ConstraintSet canonicalize(const QuadraticProgram& qp) {
  ConstraintSet cs;
  cs.n = qp.dimension();
  const int n = cs.n;
  int m = qp.num_eq() + qp.num_ineq();
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(qp.lower[i])) ++m;
    if (std::isfinite(qp.upper[i])) ++m;
  }
  cs.normals.resize(n, m);
  cs.rhs.resize(m);
  cs.norms.resize(m);
  cs.kind.reserve(static_cast<std::size_t>(m));
  cs.source.reserve(static_cast<std::size_t>(m));
  int c = 0;
  auto push = [&](const Eigen::VectorXd& normal, double b, Kind k, int src) {
    cs.normals.col(c) = normal;
    cs.rhs[c] = b;
    cs.norms[c] = normal.norm();
    cs.kind.push_back(k);
    cs.source.push_back(src);
    ++c;
  };
  for (int r = 0; r < qp.num_eq(); ++r) push(qp.eq_matrix.row(r).transpose(), qp.eq_rhs[r], Kind::Eq, r);
  cs.meq = c;
  for (int r = 0; r < qp.num_ineq(); ++r) push(qp.ineq_matrix.row(r).transpose(), qp.ineq_rhs[r], Kind::Ineq, r);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(qp.lower[i])) {
      e.setZero();
      e[i] = 1.0;
      push(e, qp.lower[i], Kind::Lower, i);
    }
    if (std::isfinite(qp.upper[i])) {
      e.setZero();
      e[i] = -1.0;
      push(e, -qp.upper[i], Kind::Upper, i);
    }
  }
  return cs;
}

// Working state of the dual active-set iteration. J spans the space
// complementary to the active normals in the metric of P^{-1}; R is the
// triangular factor of J' N_active.
class ActiveSetSolver {
 public:
  ActiveSetSolver(const QuadraticProgram& qp, const ConstraintSet& cs, const SolverSettings& settings)
      : qp_(qp), cs_(cs), settings_(settings), n_(cs.n) {}

  QpSolution run();

 private:
  bool factor();
  std::span<const double> column(int c) const {
    return {cs_.normals.data() + static_cast<std::ptrdiff_t>(c) * n_, static_cast<std::size_t>(n_)};
  }
  void compute_directions(std::span<const double> np);
  void add_active(int c);
  void drop_active(int pos);
  int most_violated_inequality();
  QpSolution finish(QpStatus status);

  const QuadraticProgram& qp_;
  const ConstraintSet& cs_;
  SolverSettings settings_;
  int n_;

  Eigen::MatrixXd J_;
  Eigen::MatrixXd R_;
  Eigen::VectorXd x_;
  Eigen::VectorXd d_;
  Eigen::VectorXd z_;
  Eigen::VectorXd r_;
  std::vector<int> active_;
  std::vector<double> u_;
  std::vector<char> is_active_;
  std::vector<double> flip_;  // equality sign chosen when it was added
  Eigen::VectorXd slacks_;
  int iterations_ = 0;
};

bool ActiveSetSolver::factor() {
  Eigen::MatrixXd P = 0.5 * (qp_.hessian + qp_.hessian.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) {
    const double scale = std::max(1.0, P.diagonal().cwiseAbs().maxCoeff());
    P.diagonal().array() += 1e-10 * scale;
    llt.compute(P);
    if (llt.info() != Eigen::Success) return false;
  }
  // J = L^{-T}, so that J J' = P^{-1}
  const Eigen::MatrixXd L = llt.matrixL();
  J_ = L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n_, n_));
  // Unconstrained minimizer x = -P^{-1} q
  x_ = -(J_ * (J_.transpose() * qp_.linear));
  return true;
}

void ActiveSetSolver::compute_directions(std::span<const double> np) {
  const int q = static_cast<int>(active_.size());
  // d = J' n_p
  simd::active().dot_columns(J_.data(), static_cast<std::size_t>(n_), static_cast<std::size_t>(n_), np.data(),
                             d_.data());
  // z = J2 d2 (primal step direction)
  z_.setZero();
  for (int i = q; i < n_; ++i) {
    simd::active().axpy(d_[i], J_.data() + static_cast<std::ptrdiff_t>(i) * n_, z_.data(),
                        static_cast<std::size_t>(n_));
  }
  // r = R^{-1} d1 (change of the active multipliers)
  if (q > 0) {
    r_.head(q) = R_.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d_.head(q));
  }
}

void ActiveSetSolver::add_active(int c) {
  const int q = static_cast<int>(active_.size());
  // Rotate d so that only its first q+1 entries are nonzero; apply the same
  // rotations to the columns of J.
  for (int i = n_ - 1; i > q; --i) {
    const double a = d_[i - 1];
    const double b = d_[i];
    if (b == 0.0) continue;
    const double h = std::hypot(a, b);
    const double cs = a / h;
    const double sn = b / h;
    d_[i - 1] = h;
    d_[i] = 0.0;
    for (int k = 0; k < n_; ++k) {
      const double ja = J_(k, i - 1);
      const double jb = J_(k, i);
      J_(k, i - 1) = cs * ja + sn * jb;
      J_(k, i) = sn * ja - cs * jb;
    }
  }
  for (int i = 0; i <= q; ++i) R_(i, q) = d_[i];
  active_.push_back(c);
  is_active_[static_cast<std::size_t>(c)] = 1;
}

void ActiveSetSolver::drop_active(int pos) {
  const int q = static_cast<int>(active_.size());
  is_active_[static_cast<std::size_t>(active_[static_cast<std::size_t>(pos)])] = 0;
  for (int j = pos; j < q - 1; ++j) R_.col(j) = R_.col(j + 1);
  R_.col(q - 1).setZero();
  active_.erase(active_.begin() + pos);
  u_.erase(u_.begin() + pos);
  // Restore upper-triangular form (R is Hessenberg from column pos on).
  for (int j = pos; j < q - 1; ++j) {
    const double a = R_(j, j);
    const double b = R_(j + 1, j);
    if (b == 0.0) continue;
    const double h = std::hypot(a, b);
    const double cs = a / h;
    const double sn = b / h;
    for (int col = j; col < q - 1; ++col) {
      const double ra = R_(j, col);
      const double rb = R_(j + 1, col);
      R_(j, col) = cs * ra + sn * rb;
      R_(j + 1, col) = sn * ra - cs * rb;
    }
    for (int k = 0; k < n_; ++k) {
      const double ja = J_(k, j);
      const double jb = J_(k, j + 1);
      J_(k, j) = cs * ja + sn * jb;
      J_(k, j + 1) = sn * ja - cs * jb;
    }
  }
}

int ActiveSetSolver::most_violated_inequality() {
  const int m = cs_.size();
  const int mi = m - cs_.meq;
  if (mi == 0) return -1;
  simd::active().dot_columns(cs_.normals.data() + static_cast<std::ptrdiff_t>(cs_.meq) * n_,
                             static_cast<std::size_t>(n_), static_cast<std::size_t>(mi), x_.data(),
                             slacks_.data());
  int best = -1;
  double worst = -settings_.tol;
  for (int i = 0; i < mi; ++i) {
    const int c = cs_.meq + i;
    if (is_active_[static_cast<std::size_t>(c)] || cs_.norms[c] == 0.0) continue;
    const double s = (slacks_[i] - cs_.rhs[c]) / cs_.norms[c];
    if (s < worst) {
      worst = s;
      best = c;
    }
  }
  return best;
}

QpSolution ActiveSetSolver::finish(QpStatus status) {
  QpSolution sol;
  sol.status = status;
  sol.x = x_;
  sol.objective = qp_.objective(x_);
  sol.iterations = iterations_;
  sol.eq_multipliers = Eigen::VectorXd::Zero(qp_.num_eq());
  sol.ineq_multipliers = Eigen::VectorXd::Zero(qp_.num_ineq());
  sol.lower_multipliers = Eigen::VectorXd::Zero(n_);
  sol.upper_multipliers = Eigen::VectorXd::Zero(n_);
  for (std::size_t a = 0; a < active_.size(); ++a) {
    const int c = active_[a];
    const double u = u_[a];
    const int src = cs_.source[static_cast<std::size_t>(c)];
    switch (cs_.kind[static_cast<std::size_t>(c)]) {
      case Kind::Eq: sol.eq_multipliers[src] = u * flip_[static_cast<std::size_t>(c)]; break;
      case Kind::Ineq: sol.ineq_multipliers[src] = u; break;
      case Kind::Lower: sol.lower_multipliers[src] = u; break;
      case Kind::Upper: sol.upper_multipliers[src] = u; break;
    }
  }
  return sol;
}

QpSolution ActiveSetSolver::run() {
  if (!factor()) {
    throw std::invalid_argument("QP hessian is not positive definite");
  }
  const int m = cs_.size();
  R_ = Eigen::MatrixXd::Zero(n_, n_);
  d_.resize(n_);
  z_.resize(n_);
  r_.resize(n_);
  slacks_.resize(std::max(m - cs_.meq, 0));
  is_active_.assign(static_cast<std::size_t>(m), 0);
  flip_.assign(static_cast<std::size_t>(m), 1.0);
  active_.reserve(static_cast<std::size_t>(n_));
  u_.reserve(static_cast<std::size_t>(n_));

  // Scratch copy so equality normals can be sign-flipped in place.
  Eigen::VectorXd np(n_);
  int next_eq = 0;

  while (true) {
    // Step 1: choose a constraint to add.
    int p = -1;
    double bp = 0.0;
    if (next_eq < cs_.meq) {
      p = next_eq++;
      np = cs_.normals.col(p);
      bp = cs_.rhs[p];
      if (simd::dot(view(np), view(x_)) - bp > 0.0) {
        np = -np;
        bp = -bp;
        flip_[static_cast<std::size_t>(p)] = -1.0;
      }
    } else {
      p = most_violated_inequality();
      if (p < 0) return finish(QpStatus::Optimal);
      np = cs_.normals.col(p);
      bp = cs_.rhs[p];
    }
    const bool equality = p < cs_.meq;
    double up = 0.0;

    // Step 2: move along the primal/dual directions until p is satisfied.
    while (true) {
      if (++iterations_ > settings_.max_iterations) return finish(QpStatus::MaxIterations);
      compute_directions(view(np));
      const int q = static_cast<int>(active_.size());

      double t1 = kInf;
      int drop = -1;
      for (int j = 0; j < q; ++j) {
        if (active_[static_cast<std::size_t>(j)] < cs_.meq) continue;
        if (r_[j] > 0.0) {
          const double ratio = u_[static_cast<std::size_t>(j)] / r_[j];
          if (ratio < t1) {
            t1 = ratio;
            drop = j;
          }
        }
      }

      const double sp = simd::dot(view(np), view(x_)) - bp;
      const double nnorm = std::max(np.norm(), 1e-300);
      // z' n_p equals |d2|^2; a vanishing d2 means n_p lies in the span of the
      // active normals.
      const double ztn = d_.tail(n_ - q).squaredNorm();
      const bool z_zero = ztn <= 1e-24 * d_.squaredNorm();
      const double t2 = z_zero ? kInf : -sp / ztn;

      if (z_zero) {
        if (equality && std::abs(sp) <= settings_.tol * nnorm) {
          break;  // redundant equality
        }
        if (drop < 0) return finish(QpStatus::Infeasible);
        // Dual step only.
        for (int j = 0; j < q; ++j) u_[static_cast<std::size_t>(j)] -= t1 * r_[j];
        up += t1;
        drop_active(drop);
        continue;
      }

      const double t = std::min(t1, t2);
      simd::active().axpy(t, z_.data(), x_.data(), static_cast<std::size_t>(n_));
      for (int j = 0; j < q; ++j) u_[static_cast<std::size_t>(j)] -= t * r_[j];
      up += t;

      if (t2 <= t1) {
        u_.push_back(up);
        add_active(p);
        break;
      }
      drop_active(drop);
    }
  }
}

}  // namespace

QuadraticProgram::QuadraticProgram(int dimension)
    : hessian(Eigen::MatrixXd::Zero(dimension, dimension)),
      linear(Eigen::VectorXd::Zero(dimension)),
      eq_matrix(0, dimension),
      eq_rhs(0),
      ineq_matrix(0, dimension),
      ineq_rhs(0),
      lower(Eigen::VectorXd::Constant(dimension, -kInf)),
      upper(Eigen::VectorXd::Constant(dimension, kInf)) {}

void QuadraticProgram::add_equality(const Eigen::Ref<const Eigen::RowVectorXd>& row, double rhs) {
  const auto r = eq_matrix.rows();
  eq_matrix.conservativeResize(r + 1, dimension());
  eq_matrix.row(r) = row;
  eq_rhs.conservativeResize(r + 1);
  eq_rhs[r] = rhs;
}

void QuadraticProgram::add_inequality(const Eigen::Ref<const Eigen::RowVectorXd>& row, double rhs) {
  const auto r = ineq_matrix.rows();
  ineq_matrix.conservativeResize(r + 1, dimension());
  ineq_matrix.row(r) = row;
  ineq_rhs.conservativeResize(r + 1);
  ineq_rhs[r] = rhs;
}

double QuadraticProgram::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x);
}

void QuadraticProgram::validate() const {
  const auto n = linear.size();
  if (hessian.rows() != n || hessian.cols() != n) throw std::invalid_argument("hessian dimension mismatch");
  if (eq_matrix.cols() != n || eq_matrix.rows() != eq_rhs.size())
    throw std::invalid_argument("equality dimension mismatch");
  if (ineq_matrix.cols() != n || ineq_matrix.rows() != ineq_rhs.size())
    throw std::invalid_argument("inequality dimension mismatch");
  if (lower.size() != n || upper.size() != n) throw std::invalid_argument("bound dimension mismatch");
  const double asym = (hessian - hessian.transpose()).cwiseAbs().maxCoeff();
  if (n > 0 && asym > 1e-9 * std::max(1.0, hessian.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("hessian is not symmetric");
}

std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::MaxIterations: return "max_iter";
  }
  return "unknown";
}

QpSolution solve(const QuadraticProgram& qp, const SolverSettings& settings) {
  qp.validate();
  const ConstraintSet cs = canonicalize(qp);
  ActiveSetSolver solver(qp, cs, settings);
  return solver.run();
}

double KktResiduals::max() const { return std::max({stationarity, primal, dual, complementarity}); }

KktResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol) {
  KktResiduals r;
  const Eigen::VectorXd& x = sol.x;
  Eigen::VectorXd grad = qp.hessian * x + qp.linear;
  if (qp.num_eq() > 0) grad -= qp.eq_matrix.transpose() * sol.eq_multipliers;
  if (qp.num_ineq() > 0) grad -= qp.ineq_matrix.transpose() * sol.ineq_multipliers;
  grad -= sol.lower_multipliers;
  grad += sol.upper_multipliers;
  r.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  r.primal = max_violation(qp, x);
  double dual = 0.0;
  double comp = 0.0;
  for (int i = 0; i < qp.num_ineq(); ++i) {
    dual = std::max(dual, -sol.ineq_multipliers[i]);
    comp = std::max(comp, std::abs(sol.ineq_multipliers[i] * (qp.ineq_matrix.row(i).dot(x) - qp.ineq_rhs[i])));
  }
  for (int i = 0; i < qp.dimension(); ++i) {
    dual = std::max({dual, -sol.lower_multipliers[i], -sol.upper_multipliers[i]});
    if (std::isfinite(qp.lower[i])) comp = std::max(comp, std::abs(sol.lower_multipliers[i] * (x[i] - qp.lower[i])));
    if (std::isfinite(qp.upper[i])) comp = std::max(comp, std::abs(sol.upper_multipliers[i] * (qp.upper[i] - x[i])));
  }
  r.dual = dual;
  r.complementarity = comp;
  return r;
}

double max_violation(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  double v = 0.0;
  if (qp.num_eq() > 0) v = std::max(v, (qp.eq_matrix * x - qp.eq_rhs).cwiseAbs().maxCoeff());
  if (qp.num_ineq() > 0) v = std::max(v, (qp.ineq_rhs - qp.ineq_matrix * x).maxCoeff());
  for (int i = 0; i < qp.dimension(); ++i) {
    if (std::isfinite(qp.lower[i])) v = std::max(v, qp.lower[i] - x[i]);
    if (std::isfinite(qp.upper[i])) v = std::max(v, x[i] - qp.upper[i]);
  }
  return std::max(v, 0.0);
}

}  // namespace mlr::qp
