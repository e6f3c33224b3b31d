#include "mlr/harness.hpp"
#include "mlr/netsim.hpp"
#include "mlr/wire.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace mlr::harness {

double Trace::sample_time(RoundIndex k, int sub) const {
  const double period = scenario.optimization.horizon.round_period;
  return static_cast<double>(k) * period + sub * period / (grid_per_round * kFineSteps);
}

namespace {

std::uint64_t bank_digest(const TrackerBank& bank) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(bank.start_round));
  for (const auto& t : bank.trackers) {
    mix(t.deprecated ? 1 : 0);
    mix(t.candidates.size());
    for (const auto& c : t.candidates) {
      mix(content_hash(c));
      mix(static_cast<std::uint64_t>(c.metadata.calc_round));
      mix(static_cast<std::uint64_t>(c.metadata.cu_id));
    }
  }
  return h;
}

struct Decoded {
  std::vector<CuMessage> cu_messages;  // for UAV receivers
  RoundInbox inbox;                    // for CU receivers
};

Decoded decode_for(int node, const RoundDelivery& d, const std::vector<Envelope>& tx, int n) {
  Decoded out;
  out.inbox = RoundInbox::empty(n);
  if (d.received.empty()) return out;
  for (std::size_t e : d.received.at(static_cast<std::size_t>(node))) {
    const auto msg = wire::decode(tx[e].payload);
    if (const auto* u = std::get_if<UavMessage>(&msg)) {
      out.inbox.uav.at(static_cast<std::size_t>(u->sender)) = *u;
    } else if (const auto* c = std::get_if<CuMessage>(&msg)) {
      out.cu_messages.push_back(*c);
      out.inbox.cu_slots.emplace_back(*c);
    } else {
      out.inbox.cu_slots.emplace_back(std::get<TrajectoryReply>(msg));
    }
  }
  return out;
}

std::string describe_state(RoundIndex k, const std::vector<CuAgent>& cus, const std::vector<UavAgent>& uavs) {
  std::ostringstream os;
  os << "round " << k << ";";
  for (const auto& c : cus) {
    os << " cu" << c.config().id << "=" << to_string(c.state()) << "/bank@" << c.bank().start_round << "/digest "
       << bank_digest(c.bank()) << ";";
  }
  for (const auto& u : uavs) {
    const auto& cur = u.current();
    os << " uav" << u.id() << "=(" << cur.metadata.calc_round << "," << cur.metadata.cu_id << ")@"
       << cur.start_round << ";";
  }
  return os.str();
}

}  // namespace

Trace run(const Scenario& sc, const RunOptions& options) {
  sc.validate();
  const int n = sc.num_uavs;
  const int m = sc.num_cus;
  const auto& opt = sc.optimization;
  const double period = opt.horizon.round_period;
  const RoundSchedule schedule = sc.schedule();
  schedule.validate();

  Trace trace;
  trace.scenario = sc;
  trace.grid_per_round = std::max(1, static_cast<int>(std::lround(period / opt.bvc_sampling_time)));

  std::vector<ReferenceTrajectory> initial;
  for (const auto& p : sc.initial_positions) initial.push_back(hover_trajectory(p, -1, opt.horizon));

  std::vector<UavAgent> uavs;
  for (UavId i = 0; i < n; ++i) {
    uavs.emplace_back(i, initial[static_cast<std::size_t>(i)], sc.targets_at(0)[static_cast<std::size_t>(i)]);
  }
  std::vector<CuAgent> cus;
  for (CuId w = 1; w <= m; ++w) {
    CuConfig cfg;
    cfg.id = w;
    cfg.num_uavs = n;
    cfg.num_cus = m;
    cfg.trigger = sc.trigger;
    cfg.optimization = opt;
    cfg.deadlock = sc.deadlock;
    cfg.soft_constraints = sc.soft_constraints;
    cfg.planner = sc.planner;
    cfg.loss_recovery = sc.loss_recovery;
    cfg.seed = sc.seed;
    cfg.distance_scale = sc.distance_scale;
    cfg.hybrid_scale = sc.hybrid_scale;
    std::vector<std::optional<Vec3>> targets(static_cast<std::size_t>(n));
    TrackerBank bank = TrackerBank::unknown(n, -1);
    if (sc.hover_bootstrap) {
      bank = TrackerBank::from_trajectories(initial);
      for (UavId i = 0; i < n; ++i) targets[static_cast<std::size_t>(i)] = sc.targets_at(0)[static_cast<std::size_t>(i)];
    }
    cus.emplace_back(cfg, bank, targets);
  }

  const LossModel loss{sc.loss_prob, sc.jams, sc.seed};
  const TrackingModel tracking{sc.delta_d_min, sc.seed};
  std::vector<Envelope> prev_tx;
  RoundDelivery prev;
  const int fine = trace.grid_per_round * kFineSteps;

  for (RoundIndex k = 0; k < sc.rounds; ++k) {
    RoundRecord rec;
    rec.round = k;
    const auto& targets = sc.targets_at(k);

    try {
      for (UavId i = 0; i < n; ++i) {
        auto& u = uavs[static_cast<std::size_t>(i)];
        u.set_target(targets[static_cast<std::size_t>(i)]);
        const auto rx = decode_for(schedule.uav_node(i), prev, prev_tx, n);
        const auto st = u.on_round_start(k, rx.cu_messages);
        rec.adopted.push_back(st.adopted);
        if (st.offers > 1) trace.events.push_back({k, "multiple_offers", i, std::to_string(st.offers)});
        rec.terminal_rest.push_back(terminal_rest(u.reference(static_cast<double>(k) * period, period), 1e-9));
        for (int s = 0; s < fine; ++s) {
          const double t = trace.sample_time(k, s);
          const NominalState ref = u.reference(t, period);
          UavSample smp;
          smp.round = k;
          smp.sub = s;
          smp.uav = i;
          smp.reference = ref.position;
          smp.actual = ref.position + tracking.disturbance(i, t);
          smp.speed = ref.velocity.norm();
          smp.target_dist = (ref.position - targets[static_cast<std::size_t>(i)]).norm();
          trace.samples.push_back(smp);
        }
      }
    } catch (const std::exception& e) {
      trace.aborted = true;
      trace.abort_reason = std::string("UAV: ") + e.what() + "; " + describe_state(k, cus, uavs);
      trace.events.push_back({k, "fatal", -1, trace.abort_reason});
      trace.rounds.push_back(rec);
      break;
    }

    std::vector<std::optional<CuMessage>> out(static_cast<std::size_t>(m));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));
    auto step_cu = [&](int w) {
      try {
        const auto rx = decode_for(schedule.cu_node(w + 1), prev, prev_tx, n);
        out[static_cast<std::size_t>(w)] = cus[static_cast<std::size_t>(w)].step(k, rx.inbox);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    };
    if (options.parallel && m > 1) {
      std::vector<std::thread> pool;
      for (int w = 0; w < m; ++w) pool.emplace_back(step_cu, w);
      for (auto& t : pool) t.join();
    } else {
      for (int w = 0; w < m; ++w) step_cu(w);
    }
    for (int w = 0; w < m && !trace.aborted; ++w) {
      if (!errors[static_cast<std::size_t>(w)]) continue;
      try {
        std::rethrow_exception(errors[static_cast<std::size_t>(w)]);
      } catch (const std::exception& e) {
        trace.aborted = true;
        trace.abort_reason = "CU " + std::to_string(w + 1) + ": " + e.what() + "; " + describe_state(k, cus, uavs);
        rec.theorem1_failures.push_back(trace.abort_reason);
      }
    }
    if (trace.aborted) {
      trace.events.push_back({k, "fatal", -1, trace.abort_reason});
      trace.rounds.push_back(rec);
      break;
    }

    // Per-CU records and events.
    std::vector<int> plans_per_uav(static_cast<std::size_t>(n), 0);
    for (int w = 0; w < m; ++w) {
      const auto& cu = cus[static_cast<std::size_t>(w)];
      const auto& r = cu.record();
      const int node = schedule.cu_node(w + 1);
      CuRoundRecord c;
      c.cu = w + 1;
      c.state_in = r.state_in;
      c.state_out = r.state_out;
      c.silent = r.silent;
      for (const auto& t : cu.bank().trackers) c.deprecated_trackers += t.deprecated ? 1 : 0;
      c.bank_digest = bank_digest(cu.bank());
      c.selected = r.selected;
      c.outcome = r.outcome;
      if (r.qp_status) c.qp_status = std::string(qp::to_string(*r.qp_status));
      c.candidate_verified = r.candidate_verified;
      if (r.plan) {
        const auto& p = std::get<TrajectoryPayload>(out[static_cast<std::size_t>(w)]->payload);
        c.planned_uav = p.uav;
        ++plans_per_uav[static_cast<std::size_t>(p.uav)];
      }
      c.deadlock = r.deadlock;
      rec.cus.push_back(c);

      if (r.state_in == CuState::RunDmpc && r.state_out != CuState::RunDmpc) {
        trace.events.push_back({k, "mlr_entry", node, std::string(to_string(r.state_out))});
      }
      if (r.state_in != CuState::RunDmpc && r.state_out == CuState::RunDmpc) {
        trace.events.push_back({k, "mlr_exit", node, ""});
      }
      if (r.update.deprecated_ambiguous) trace.events.push_back({k, "deprecated", node, "ambiguous"});
      if (r.update.deprecated_missing_cu) trace.events.push_back({k, "deprecated", node, "missing_cu_slot"});
      if (r.outcome == PlanOutcome::Fallback) {
        trace.events.push_back({k, "fallback", node, "uav " + std::to_string(*r.selected) + " " + c.qp_status});
      }
      if (r.requested) trace.events.push_back({k, "request", node, "uav " + std::to_string(*r.requested)});
      if (r.update.replies > 0) trace.events.push_back({k, "reply", node, std::to_string(r.update.replies)});
      if (r.deadlock) trace.events.push_back({k, "deadlock", node, ""});
      if (r.intermediate) {
        std::ostringstream os;
        os << "uav " << r.intermediate->uav << (r.intermediate->active ? " set " : " clear ")
           << r.intermediate->position.x() << "," << r.intermediate->position.y() << ","
           << r.intermediate->position.z();
        trace.events.push_back({k, "intermediate_target", node, os.str()});
      }
      if (r.outcome != PlanOutcome::None && !r.candidate_verified && r.outcome != PlanOutcome::Solved) {
        rec.theorem1_failures.push_back("CU " + std::to_string(w + 1) + " used an unverified candidate");
      }
    }

    // Oracle: compare every CU's view with what the UAVs actually follow.
    for (int w = 0; w < m; ++w) {
      const auto& bank = cus[static_cast<std::size_t>(w)].bank();
      for (UavId i = 0; i < n; ++i) {
        const auto& t = bank[i];
        if (t.deprecated) continue;
        const auto& truth = uavs[static_cast<std::size_t>(i)].current();
        if (std::find(t.candidates.begin(), t.candidates.end(), truth) == t.candidates.end()) {
          rec.lemma1_failures.push_back("CU " + std::to_string(w + 1) + " tracker " + std::to_string(i));
        }
        for (int v = w + 1; v < m; ++v) {
          const auto& other = cus[static_cast<std::size_t>(v)].bank()[i];
          if (!other.deprecated && !(other == t)) {
            rec.lemma2_failures.push_back("CUs " + std::to_string(w + 1) + "," + std::to_string(v + 1) +
                                          " tracker " + std::to_string(i));
          }
        }
      }
    }
    for (UavId i = 0; i < n; ++i) {
      if (plans_per_uav[static_cast<std::size_t>(i)] > 1) {
        rec.uniqueness_failures.push_back("uav " + std::to_string(i) + " planned " +
                                          std::to_string(plans_per_uav[static_cast<std::size_t>(i)]) + " times");
      }
    }

    // Communication phase.
    std::vector<Envelope> tx;
    std::vector<bool> slot_used(static_cast<std::size_t>(schedule.slot_count()), false);
    for (int w = 0; w < m; ++w) {
      if (!out[static_cast<std::size_t>(w)]) continue;
      const int slot = schedule.cu_slot(w + 1);
      tx.push_back({slot, schedule.cu_node(w + 1), wire::encode(*out[static_cast<std::size_t>(w)])});
      slot_used[static_cast<std::size_t>(slot)] = true;
    }
    for (UavId i = 0; i < n; ++i) {
      auto e = uavs[static_cast<std::size_t>(i)].emit();
      tx.push_back({schedule.uav_slot(i), schedule.uav_node(i), wire::encode(e.status)});
      for (const auto& r : e.replies) {
        const int slot = schedule.cu_slot(r.slot_owner);
        if (slot_used[static_cast<std::size_t>(slot)]) {
          trace.events.push_back({k, "reply_dropped", schedule.uav_node(i), "slot " + std::to_string(slot)});
          continue;
        }
        slot_used[static_cast<std::size_t>(slot)] = true;
        tx.push_back({slot, schedule.uav_node(i), wire::encode(r)});
      }
    }
    std::sort(tx.begin(), tx.end(), [](const Envelope& a, const Envelope& b) { return a.slot < b.slot; });
    prev = run_round(k, tx, loss, schedule);
    prev_tx = std::move(tx);
    rec.sent = static_cast<int>(prev_tx.size());
    rec.lost = static_cast<int>(prev.lost);
    for (const auto& r : prev.received) rec.delivered += static_cast<int>(r.size());
    trace.rounds.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace mlr::harness
