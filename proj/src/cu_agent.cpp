#include "mlr/cu_agent.hpp"

#include <algorithm>
#include <string>

namespace mlr {

std::string_view to_string(CuState s) {
  switch (s) {
    case CuState::RunDmpc: return "RUN_DMPC";
    case CuState::Wait: return "WAIT";
    case CuState::RequestTrajectory: return "REQUEST_TRAJECTORY";
    case CuState::WaitForUpdate: return "WAIT_FOR_UPDATE";
  }
  return "?";
}

bool allowed_transition(CuState from, CuState to) {
  using S = CuState;
  switch (from) {
    case S::RunDmpc: return to == S::RunDmpc || to == S::Wait || to == S::RequestTrajectory;
    case S::Wait: return to == S::RequestTrajectory || to == S::RunDmpc;
    case S::RequestTrajectory: return to == S::WaitForUpdate || to == S::RunDmpc;
    case S::WaitForUpdate: return to == S::RequestTrajectory || to == S::RunDmpc;
  }
  return false;
}

CuAgent::CuAgent(CuConfig cfg, TrackerBank initial, std::vector<std::optional<Vec3>> targets)
    : cfg_(std::move(cfg)), bank_(std::move(initial)), targets_(std::move(targets)) {
  if (cfg_.num_uavs != bank_.size() || static_cast<int>(targets_.size()) != cfg_.num_uavs) {
    throw std::invalid_argument("CU configured for a different swarm size");
  }
  if (cfg_.id < 1 || cfg_.id > cfg_.num_cus) throw std::invalid_argument("CU id out of range");
  cfg_.optimization.validate();
  last_calc_.assign(static_cast<std::size_t>(cfg_.num_uavs), 0);
  for (UavId i = 0; i < bank_.size(); ++i) {
    if (!bank_[i].candidates.empty()) last_calc_[static_cast<std::size_t>(i)] = bank_[i].candidates.front().metadata.calc_round;
  }
  state_ = bank_.all_up_to_date() ? CuState::RunDmpc : CuState::RequestTrajectory;
  std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                    static_cast<std::uint32_t>(cfg_.id)};
  rng_.seed(seq);
}

std::optional<CuMessage> CuAgent::step(RoundIndex k, const RoundInbox& rx) {
  record_ = CuStepRecord{};
  record_.round = k;
  record_.state_in = state_;

  RoundInbox in = rx;
  if (last_tx_) {
    const bool heard_self = std::any_of(in.cu_slots.begin(), in.cu_slots.end(), [&](const CuSlotContent& c) {
      const auto* m = std::get_if<CuMessage>(&c);
      return m && m->sender == cfg_.id;
    });
    // A CU knows what it sent even when it could not hear itself.
    if (!heard_self) in.cu_slots.emplace_back(*last_tx_);
  }

  if (bank_.start_round == k - 2) {
    bank_ = update(bank_, in, cfg_.num_cus, UpdatePolicy{cfg_.loss_recovery}, &record_.update);
    record_.updated = true;
  } else if (bank_.start_round != k - 1) {
    throw std::logic_error("CU stepped out of order");
  }

  for (UavId i = 0; i < cfg_.num_uavs; ++i) {
    if (const auto& m = in.uav[static_cast<std::size_t>(i)]) targets_[static_cast<std::size_t>(i)] = m->target;
  }
  for (const auto& c : in.cu_slots) {
    const auto* m = std::get_if<CuMessage>(&c);
    if (!m) continue;
    if (const auto* t = std::get_if<TrajectoryPayload>(&m->payload)) {
      auto& lc = last_calc_.at(static_cast<std::size_t>(t->uav));
      lc = std::max(lc, t->trajectory.metadata.calc_round);
    }
    for (const auto& it : m->planner_targets) {
      if (it.active) {
        intermediate_[it.uav] = it;
      } else {
        intermediate_.erase(it.uav);
      }
    }
  }

  const bool donated = state_ == CuState::WaitForUpdate;
  if (bank_.all_up_to_date()) {
    state_ = CuState::RunDmpc;
  } else if (state_ == CuState::RunDmpc) {
    state_ = CuState::Wait;
  }

  std::optional<CuMessage> out;
  if (donated) {
    // The requested UAV uses this CU's slot in this round.
    if (state_ != CuState::RunDmpc) state_ = CuState::RequestTrajectory;
  } else {
    switch (state_) {
      case CuState::RunDmpc: out = run_dmpc(k, in); break;
      case CuState::Wait:
        out = CuMessage{cfg_.id, EmptyPayload{}, priorities(k, {}, false), {}};
        state_ = CuState::RequestTrajectory;
        break;
      case CuState::RequestTrajectory: {
        UavId pick = -1;
        for (UavId i = 0; i < bank_.size(); ++i) {
          if (bank_[i].deprecated) {
            pick = i;
            break;
          }
        }
        out = CuMessage{cfg_.id, RequestPayload{pick, cfg_.id}, priorities(k, {}, false), {}};
        record_.requested = pick;
        state_ = CuState::WaitForUpdate;
        break;
      }
      case CuState::WaitForUpdate: break;
    }
  }
  record_.silent = !out.has_value();
  record_.state_out = state_;
  last_tx_ = out;
  return out;
}

PriorityVector CuAgent::priorities(RoundIndex k, const std::set<UavId>& just_recomputed, bool strict) const {
  PriorityInputs pin;
  pin.bank = &bank_;
  pin.targets = &targets_;
  pin.round = k;
  pin.last_calc = &last_calc_;
  pin.just_recomputed = just_recomputed;
  pin.deadlocked = deadlocked_;
  pin.distance_scale = cfg_.distance_scale;
  pin.hybrid_scale = cfg_.hybrid_scale;
  return strict ? compute_priorities(cfg_.trigger, pin) : compute_priorities_best_effort(cfg_.trigger, pin);
}

Vec3 CuAgent::planning_target(UavId uav, RoundIndex k, const std::vector<NominalState>& states) {
  const Vec3 truth = *targets_[static_cast<std::size_t>(uav)];
  if (!cfg_.planner) return truth;
  const bool active = k <= planner_until_;
  auto it = intermediate_.find(uav);
  if (!active) {
    if (it != intermediate_.end()) {
      intermediate_.erase(it);
      record_.intermediate = IntermediateTarget{uav, truth, false};
    }
    return truth;
  }
  const Vec3& p = states[static_cast<std::size_t>(uav)].position;
  if (it != intermediate_.end() && (it->second.position - p).norm() <= cfg_.deadlock.target_tolerance) {
    intermediate_.erase(it);
    it = intermediate_.end();
    record_.intermediate = IntermediateTarget{uav, truth, false};
  }
  if (it == intermediate_.end()) {
    auto next = make_room(uav, states, targets_, cfg_.deadlock, cfg_.optimization.d_hat_min, rng_);
    if (next) {
      const Box3& box = cfg_.optimization.state_box.position;
      const Vec3 margin = Vec3::Constant(0.1);
      next->position = next->position.cwiseMax(box.lower + margin).cwiseMin(box.upper - margin);
      it = intermediate_.emplace(uav, *next).first;
      record_.intermediate = *next;
    }
  }
  return it == intermediate_.end() ? truth : it->second.position;
}

CuMessage CuAgent::run_dmpc(RoundIndex k, const RoundInbox& in) {
  const int m = cfg_.num_cus;
  std::vector<PriorityVector> received;
  for (const auto& c : in.cu_slots) {
    if (const auto* msg = std::get_if<CuMessage>(&c); msg && msg->priorities) received.push_back(*msg->priorities);
  }
  PriorityVector j;
  if (received.empty()) {
    // Nothing to agree on (first round, or every slot carried a reply): fall
    // back to what the shared bank alone determines.
    PriorityInputs pin;
    pin.bank = &bank_;
    pin.targets = &targets_;
    pin.round = k;
    pin.distance_scale = cfg_.distance_scale;
    pin.hybrid_scale = cfg_.hybrid_scale;
    j = compute_priorities(cfg_.trigger, pin);
  } else {
    j = consensus(received);
  }

  const auto states = reference_states(bank_);
  deadlocked_.clear();
  if (cfg_.planner) {
    record_.deadlock = detect(bank_, targets_, cfg_.deadlock);
    if (record_.deadlock) {
      planner_until_ = k + cfg_.planner_hold_rounds;
      const auto st = stalled(states, targets_, cfg_.deadlock);
      deadlocked_.insert(st.begin(), st.end());
    }
  }

  const Selection sel = select(j, m, k, cfg_.id);
  record_.selected = sel.own_uav;
  record_.aet = sel.aet;

  CuMessage msg{cfg_.id, EmptyPayload{}, std::nullopt, {}};
  std::set<UavId> recomputed;
  const UavId i = sel.own_uav;
  const auto& target = targets_[static_cast<std::size_t>(i)];
  if (j[static_cast<std::size_t>(i)] != 0 && bank_[i].singleton() && target) {
    PlanningRequest req;
    req.uav = i;
    req.round = k;
    req.cu = cfg_.id;
    req.target = planning_target(i, k, states);
    req.aet = sel.aet;
    req.soft = cfg_.soft_constraints;
    if (req.soft) {
      req.slack_weights.resize(static_cast<std::size_t>(cfg_.num_uavs));
      for (UavId o = 0; o < cfg_.num_uavs; ++o) {
        req.slack_weights[static_cast<std::size_t>(o)] =
            o == i ? 0.0 : right_side_weight(i, o, states, cfg_.optimization);
      }
    }
    const TrajectoryProblem pb = build_problem(req, bank_, cfg_.optimization);
    record_.candidate_verified = verify_candidate(pb.shifted_candidate, pb, cfg_.verify_tol);
    const PlanResult res = solve_problem(pb, cfg_.solver);
    record_.qp_status = res.solution.status;
    record_.qp_iterations = res.solution.iterations;
    ReferenceTrajectory plan;
    if (res.trajectory) {
      plan = *res.trajectory;
      record_.outcome = PlanOutcome::Solved;
    } else if (record_.candidate_verified) {
      plan = pb.shifted_candidate;
      plan.metadata = TrajectoryMetadata{k, cfg_.id};
      record_.outcome = PlanOutcome::Fallback;
    } else {
      throw InvariantViolation("round " + std::to_string(k) + ", CU " + std::to_string(cfg_.id) + ", UAV " +
                               std::to_string(i) + ": QP " + std::string(qp::to_string(res.solution.status)) +
                               " and the shifted candidate is infeasible");
    }
    msg.payload = TrajectoryPayload{i, plan};
    record_.plan = plan;
    recomputed.insert(i);
    last_calc_[static_cast<std::size_t>(i)] = k;
  }
  if (record_.intermediate) msg.planner_targets.push_back(*record_.intermediate);
  msg.priorities = priorities(k, recomputed, true);
  return msg;
}

}  // namespace mlr
