#include "mlr/planning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mlr {

bool Box3::contains(const Vec3& v, double tol) const {
  for (int a = 0; a < 3; ++a) {
    if (v[a] < lower[a] - tol || v[a] > upper[a] + tol) return false;
  }
  return true;
}

namespace {

void check_multiple(double t, double sub, const char* what) {
  const double r = t / sub;
  if (!(sub > 0.0) || std::round(r) < 1.0 || std::abs(r - std::round(r)) > 1e-9 * r) {
    throw std::invalid_argument(std::string("round period must be an integer multiple of ") + what);
  }
}

// Response of position, velocity and acceleration at local time tau to a
// unit jerk on step s.
struct Influence {
  double p = 0.0, v = 0.0, a = 0.0;
};

Influence influence(double tau, int step, double ts) {
  const double t0 = step * ts;
  if (tau <= t0) return {};
  const double e = std::min(tau, t0 + ts) - t0;
  const double after = tau - (t0 + e);
  Influence f;
  f.a = e;
  f.v = e * e / 2.0 + e * after;
  f.p = e * e * e / 6.0 + e * e / 2.0 * after + e * after * after / 2.0;
  return f;
}

// State at tau as an affine function of the jerks: free response plus
// per-step influences (identical for every axis).
struct AffineState {
  NominalState free;
  std::vector<Influence> g;
};

AffineState affine_state(const NominalState& x0, double tau, int steps, double ts) {
  AffineState s;
  s.free = propagate(x0, Vec3::Zero(), tau);
  s.g.resize(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) s.g[static_cast<std::size_t>(k)] = influence(tau, k, ts);
  return s;
}

double weight_or_base(const std::vector<double>& w, UavId j, double base) {
  if (j >= 0 && static_cast<std::size_t>(j) < w.size()) return w[static_cast<std::size_t>(j)];
  return base;
}

}  // namespace

void OptimizationConfig::validate() const {
  horizon.validate();
  const double t = horizon.round_period;
  check_multiple(t, bvc_sampling_time, "T_c");
  check_multiple(t, box_sampling_time, "T_b");
  check_multiple(t, cost_sampling_time, "T_o");
  if (bvc_steps < 1 || box_steps < 0 || cost_steps < 0) throw std::invalid_argument("horizon lengths must be positive");
  if (!(d_hat_min > 0.0)) throw std::invalid_argument("d_hat_min must be positive");
  if (!(theta.minCoeff() > 0.0)) throw std::invalid_argument("theta entries must be positive");
  if (!(input_weight > 0.0)) throw std::invalid_argument("input weight must be positive");
  if (position_weight.minCoeff() < 0.0 || velocity_weight.minCoeff() < 0.0 || acceleration_weight.minCoeff() < 0.0) {
    throw std::invalid_argument("state weights must be nonnegative");
  }
  if (soft_weight_base < 0.0 || soft_weight_right < 0.0 || soft_clearance < 0.0) {
    throw std::invalid_argument("soft constraint weights must be nonnegative");
  }
  for (const Box3* b : {&input_box, &state_box.position, &state_box.velocity, &state_box.acceleration}) {
    if ((b->lower.array() > b->upper.array()).any()) throw std::invalid_argument("box with lower > upper");
  }
  if (!(input_box.lower.maxCoeff() <= 0.0 && input_box.upper.minCoeff() >= 0.0)) {
    throw std::invalid_argument("input box must contain zero jerk");
  }
}

double scaled_norm(const Vec3& v, const Vec3& theta) { return v.cwiseQuotient(theta).norm(); }

double BvcHalfspace::margin(const Vec3& p, const Vec3& theta) const {
  return normal.dot((anchor - p).cwiseQuotient(theta)) - rhs;
}

std::vector<BvcHalfspace> build_bvc(const ReferenceTrajectory& own, const std::vector<ReferenceTrajectory>& others,
                                    UavId other_uav, bool other_in_aet, const OptimizationConfig& config) {
  if (others.empty()) throw std::invalid_argument("build_bvc needs at least one candidate");
  const double t = config.round_period();
  const double tc = config.bvc_sampling_time;
  std::vector<BvcHalfspace> out;
  out.reserve(others.size() * static_cast<std::size_t>(config.bvc_steps));
  for (const auto& other : others) {
    if (other.start_round != own.start_round) throw std::invalid_argument("candidates must share a start round");
    for (int h = 1; h <= config.bvc_steps; ++h) {
      const double tau = t + h * tc;
      const Vec3 pi = sample(own, tau).position;
      const Vec3 pj = sample(other, tau).position;
      const Vec3 n = (pj - pi).cwiseQuotient(config.theta);
      const double len = n.norm();
      if (len < 1e-9) {
        throw std::domain_error("reference positions of UAV " + std::to_string(other_uav) + " coincide");
      }
      BvcHalfspace hs;
      hs.normal = n / len;
      hs.relaxed = !other_in_aet;
      hs.rhs = other_in_aet ? 0.5 * (config.d_hat_min + len) : config.d_hat_min;
      hs.time_index = h;
      hs.other_uav = other_uav;
      hs.anchor = pj;
      out.push_back(hs);
    }
  }
  return out;
}

TrajectoryProblem build_problem(const PlanningRequest& req, const TrackerBank& bank,
                                const OptimizationConfig& config) {
  if (!bank.all_up_to_date()) throw std::logic_error("planning on a deprecated tracker bank");
  if (req.uav < 0 || req.uav >= bank.size()) throw std::logic_error("planning for an unknown UAV");
  const auto& own_tracker = bank[req.uav];
  if (!own_tracker.singleton()) throw std::logic_error("planning needs a unique current trajectory");
  if (bank.start_round != req.round - 1) throw std::logic_error("bank is not at the planning round");

  const ReferenceTrajectory& own = own_tracker.candidates.front();
  const int steps = config.horizon.input_steps();
  const double ts = config.horizon.sampling_time;
  if (static_cast<int>(own.jerks.size()) != steps) throw std::logic_error("trajectory length differs from config");

  TrajectoryProblem pb;
  pb.uav = req.uav;
  pb.round = req.round;
  pb.cu = req.cu;
  pb.config = config;
  pb.shifted_candidate = shift(own);
  pb.initial_state = pb.shifted_candidate.initial_state;
  pb.jerk_variables = 3 * steps;

  const int n_uav = bank.size();
  for (UavId j = 0; j < n_uav; ++j) {
    if (j == req.uav || bank[j].candidates.empty()) continue;
    const bool in_aet = std::find(req.aet.begin(), req.aet.end(), j) != req.aet.end();
    auto hs = build_bvc(own, bank[j].candidates, j, in_aet, config);
    pb.halfspaces.insert(pb.halfspaces.end(), hs.begin(), hs.end());
  }

  pb.slack_index.assign(static_cast<std::size_t>(n_uav), -1);
  int dim = pb.jerk_variables;
  if (req.soft) {
    for (UavId j = 0; j < n_uav; ++j) {
      if (j != req.uav && !bank[j].candidates.empty()) pb.slack_index[static_cast<std::size_t>(j)] = dim++;
    }
  }

  qp::QuadraticProgram& qp = pb.qp;
  qp = qp::QuadraticProgram(dim);
  const NominalState& x0 = pb.initial_state;
  auto var = [](int step, int axis) { return 3 * step + axis; };

  // Cost: tracking error at each cost sample plus the input effort applied
  // there.
  for (int kappa = 0; kappa <= config.cost_steps; ++kappa) {
    const double tau = kappa * config.cost_sampling_time;
    const AffineState s = affine_state(x0, tau, steps, ts);
    for (int a = 0; a < 3; ++a) {
      const double w[3] = {config.position_weight[a], config.velocity_weight[a], config.acceleration_weight[a]};
      const double c[3] = {s.free.position[a] - req.target[a], s.free.velocity[a], s.free.acceleration[a]};
      for (int q = 0; q < 3; ++q) {
        if (w[q] == 0.0) continue;
        for (int k1 = 0; k1 < steps; ++k1) {
          const Influence& f1 = s.g[static_cast<std::size_t>(k1)];
          const double g1 = q == 0 ? f1.p : (q == 1 ? f1.v : f1.a);
          if (g1 == 0.0) continue;
          qp.linear[var(k1, a)] += 2.0 * w[q] * c[q] * g1;
          for (int k2 = 0; k2 < steps; ++k2) {
            const Influence& f2 = s.g[static_cast<std::size_t>(k2)];
            const double g2 = q == 0 ? f2.p : (q == 1 ? f2.v : f2.a);
            qp.hessian(var(k1, a), var(k2, a)) += 2.0 * w[q] * g1 * g2;
          }
        }
      }
    }
    const int step = static_cast<int>(std::floor(tau / ts + 1e-9));
    if (step < steps) {
      for (int a = 0; a < 3; ++a) qp.hessian(var(step, a), var(step, a)) += 2.0 * config.input_weight;
    }
  }
  for (UavId j = 0; j < n_uav; ++j) {
    const int e = pb.slack_index[static_cast<std::size_t>(j)];
    if (e < 0) continue;
    const double w = weight_or_base(req.slack_weights, j, config.soft_weight_base);
    qp.hessian(e, e) += 2.0 * w;
    qp.linear[e] -= 2.0 * w * config.soft_clearance;
    qp.lower[e] = 0.0;
  }

  // Input box.
  for (int k = 0; k < steps; ++k) {
    for (int a = 0; a < 3; ++a) {
      qp.lower[var(k, a)] = config.input_box.lower[a];
      qp.upper[var(k, a)] = config.input_box.upper[a];
    }
  }

  // Terminal rest.
  {
    const AffineState s = affine_state(x0, steps * ts, steps, ts);
    qp.eq_matrix = Eigen::MatrixXd::Zero(6, dim);
    qp.eq_rhs = Eigen::VectorXd::Zero(6);
    for (int a = 0; a < 3; ++a) {
      for (int k = 0; k < steps; ++k) {
        qp.eq_matrix(a, var(k, a)) = s.g[static_cast<std::size_t>(k)].v;
        qp.eq_matrix(3 + a, var(k, a)) = s.g[static_cast<std::size_t>(k)].a;
      }
      qp.eq_rhs[a] = -s.free.velocity[a];
      qp.eq_rhs[3 + a] = -s.free.acceleration[a];
    }
  }

  // Inequalities, assembled row by row into a preallocated matrix.
  const auto& box = config.state_box;
  int rows = 0;
  for (const Box3* b : {&box.position, &box.velocity, &box.acceleration}) {
    for (int a = 0; a < 3; ++a) {
      rows += std::isfinite(b->lower[a]) ? 1 : 0;
      rows += std::isfinite(b->upper[a]) ? 1 : 0;
    }
  }
  rows = rows * config.box_steps + static_cast<int>(pb.halfspaces.size());
  qp.ineq_matrix = Eigen::MatrixXd::Zero(rows, dim);
  qp.ineq_rhs = Eigen::VectorXd::Zero(rows);
  int r = 0;
  for (int kappa = 1; kappa <= config.box_steps; ++kappa) {
    const AffineState s = affine_state(x0, kappa * config.box_sampling_time, steps, ts);
    const Box3* boxes[3] = {&box.position, &box.velocity, &box.acceleration};
    const Vec3 free[3] = {s.free.position, s.free.velocity, s.free.acceleration};
    for (int q = 0; q < 3; ++q) {
      for (int a = 0; a < 3; ++a) {
        auto fill = [&](double sign, double bound) {
          for (int k = 0; k < steps; ++k) {
            const Influence& f = s.g[static_cast<std::size_t>(k)];
            qp.ineq_matrix(r, var(k, a)) = sign * (q == 0 ? f.p : (q == 1 ? f.v : f.a));
          }
          qp.ineq_rhs[r] = sign * (bound - free[q][a]);
          ++r;
        };
        if (std::isfinite(boxes[q]->lower[a])) fill(1.0, boxes[q]->lower[a]);
        if (std::isfinite(boxes[q]->upper[a])) fill(-1.0, boxes[q]->upper[a]);
      }
    }
  }
  for (const auto& hs : pb.halfspaces) {
    const AffineState s = affine_state(x0, hs.time_index * config.bvc_sampling_time, steps, ts);
    const Vec3 w = hs.normal.cwiseQuotient(config.theta);
    for (int k = 0; k < steps; ++k) {
      for (int a = 0; a < 3; ++a) qp.ineq_matrix(r, var(k, a)) = -w[a] * s.g[static_cast<std::size_t>(k)].p;
    }
    const int e = pb.slack_index[static_cast<std::size_t>(hs.other_uav)];
    if (e >= 0) qp.ineq_matrix(r, e) = -1.0;
    qp.ineq_rhs[r] = hs.rhs - w.dot(hs.anchor) + w.dot(s.free.position);
    ++r;
  }
  return pb;
}

ReferenceTrajectory extract_trajectory(const TrajectoryProblem& pb, const Eigen::VectorXd& x) {
  ReferenceTrajectory t;
  t.start_round = pb.round;
  t.initial_state = pb.initial_state;
  t.sampling_time = pb.config.horizon.sampling_time;
  t.steps_per_round = pb.config.horizon.steps_per_round();
  t.metadata = TrajectoryMetadata{pb.round, pb.cu};
  const int steps = pb.jerk_variables / 3;
  t.jerks.resize(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) t.jerks[static_cast<std::size_t>(k)] = x.segment<3>(3 * k);
  return t;
}

Eigen::VectorXd decision_vector(const TrajectoryProblem& pb, const ReferenceTrajectory& traj) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(pb.qp.dimension());
  const int steps = pb.jerk_variables / 3;
  if (static_cast<int>(traj.jerks.size()) != steps) throw std::invalid_argument("trajectory length differs");
  for (int k = 0; k < steps; ++k) x.segment<3>(3 * k) = traj.jerks[static_cast<std::size_t>(k)];
  return x;
}

bool verify_candidate(const ReferenceTrajectory& traj, const TrajectoryProblem& pb, double tol) {
  if (traj.start_round != pb.round) return false;
  if (static_cast<int>(traj.jerks.size()) * 3 != pb.jerk_variables) return false;
  const NominalState& a = traj.initial_state;
  const NominalState& b = pb.initial_state;
  const double d = std::max({(a.position - b.position).cwiseAbs().maxCoeff(),
                             (a.velocity - b.velocity).cwiseAbs().maxCoeff(),
                             (a.acceleration - b.acceleration).cwiseAbs().maxCoeff()});
  if (d > tol) return false;
  return qp::max_violation(pb.qp, decision_vector(pb, traj)) <= tol;
}

PlanResult solve_problem(const TrajectoryProblem& pb, const qp::SolverSettings& settings) {
  PlanResult out;
  out.solution = qp::solve(pb.qp, settings);
  if (out.solution.optimal()) out.trajectory = extract_trajectory(pb, out.solution.x);
  return out;
}

}  // namespace mlr
