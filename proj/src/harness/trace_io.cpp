#include "mlr/harness.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace mlr::harness {

namespace {

// Fixed formatting so traces compare byte for byte.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace

std::string samples_csv(const Trace& trace) {
  std::string s = "round,sub,uav,ref_x,ref_y,ref_z,act_x,act_y,act_z,vel,target_dist\n";
  for (const auto& x : trace.samples) {
    s += std::to_string(x.round) + "," + std::to_string(x.sub) + "," + std::to_string(x.uav);
    for (const Vec3* v : {&x.reference, &x.actual}) {
      for (int a = 0; a < 3; ++a) s += "," + num((*v)[a]);
    }
    s += "," + num(x.speed) + "," + num(x.target_dist) + "\n";
  }
  return s;
}

std::string metrics_csv(const Metrics& m) {
  std::string s = "round,dmin,dmax,min_pair_dist\n";
  for (std::size_t k = 0; k < m.min_target_dist.size(); ++k) {
    s += std::to_string(k) + "," + num(m.min_target_dist[k]) + "," + num(m.max_target_dist[k]) + "," +
         num(m.min_pair_dist[k]) + "\n";
  }
  return s;
}

std::string events_jsonl(const Trace& trace) {
  std::string s;
  for (const auto& e : trace.events) {
    nlohmann::ordered_json j;
    j["round"] = e.round;
    j["kind"] = e.kind;
    j["node"] = e.node;
    j["detail"] = e.detail;
    s += j.dump() + "\n";
  }
  return s;
}

std::string rounds_jsonl(const Trace& trace) {
  std::string s;
  for (const auto& r : trace.rounds) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["sent"] = r.sent;
    j["delivered"] = r.delivered;
    j["lost"] = r.lost;
    auto cus = nlohmann::ordered_json::array();
    for (const auto& c : r.cus) {
      nlohmann::ordered_json cj;
      cj["cu"] = c.cu;
      cj["state_in"] = std::string(to_string(c.state_in));
      cj["state_out"] = std::string(to_string(c.state_out));
      cj["silent"] = c.silent;
      cj["deprecated"] = c.deprecated_trackers;
      cj["bank_digest"] = c.bank_digest;
      cj["selected"] = c.selected ? nlohmann::ordered_json(*c.selected) : nlohmann::ordered_json();
      cj["planned"] = c.planned_uav ? nlohmann::ordered_json(*c.planned_uav) : nlohmann::ordered_json();
      cj["outcome"] = c.outcome == PlanOutcome::Solved ? "solved" : c.outcome == PlanOutcome::Fallback ? "fallback" : "none";
      cj["qp_status"] = c.qp_status;
      cj["deadlock"] = c.deadlock;
      cus.push_back(cj);
    }
    j["cus"] = cus;
    j["adopted"] = r.adopted;
    j["terminal_rest"] = r.terminal_rest;
    j["lemma1_failures"] = r.lemma1_failures;
    j["lemma2_failures"] = r.lemma2_failures;
    j["theorem1_failures"] = r.theorem1_failures;
    j["uniqueness_failures"] = r.uniqueness_failures;
    s += j.dump() + "\n";
  }
  return s;
}

void write_trace(const Trace& trace, const Metrics& m, const std::string& dir) {
  const std::filesystem::path d(dir);
  std::filesystem::create_directories(d);
  write_file(d / "samples.csv", samples_csv(trace));
  write_file(d / "metrics.csv", metrics_csv(m));
  write_file(d / "events.jsonl", events_jsonl(trace));
  write_file(d / "rounds.jsonl", rounds_jsonl(trace));
}

}  // namespace mlr::harness
