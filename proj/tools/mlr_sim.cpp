// Command-line scenario runner.

#include "mlr/harness.hpp"
#include "mlr/simd/kernels.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>

using namespace mlr;

int main(int argc, char** argv) {
  CLI::App app{"Loss-tolerant distributed MPC swarm simulator"};
  std::string scenario_arg = "formations";
  std::optional<int> n_uavs, n_cus;
  std::optional<std::string> trigger;
  std::optional<double> loss_prob;
  std::vector<std::string> jams;
  bool disable_mlr = false;
  std::optional<std::uint64_t> seed;
  std::optional<RoundIndex> rounds;
  std::string out_dir;
  bool check = false;
  bool parallel = false;
  std::optional<bool> soft, planner;
  std::vector<std::string> settings;
  std::string simd;
  int margin_samples = 20000;

  app.add_option("--scenario", scenario_arg, "built-in scenario name or scenario file");
  app.add_option("--n-uavs", n_uavs, "number of UAVs");
  app.add_option("--n-cus", n_cus, "number of computation units");
  app.add_option("--trigger", trigger, "event trigger")->check(CLI::IsMember({"rr", "dt", "ht"}));
  app.add_option("--loss-prob", loss_prob, "per-receiver message loss probability")->check(CLI::Range(0.0, 1.0));
  app.add_option("--jam", jams, "jam window <start>:<end>:<node,...> (repeatable)");
  app.add_flag("--disable-mlr", disable_mlr, "ablation: never deprecate trackers");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--rounds", rounds, "number of rounds");
  app.add_option("--out", out_dir, "write the trace into this directory");
  app.add_flag("--check", check, "run all oracles, nonzero exit on failure");
  app.add_flag("--parallel", parallel, "run CU computation phases on threads");
  app.add_option("--soft", soft, "soft constraints (true/false)");
  app.add_option("--planner", planner, "deadlock planner (true/false)");
  app.add_option("--set", settings, "scenario override key=value (repeatable)");
  app.add_option("--simd", simd, "kernel backend (scalar, avx2, neon)");
  app.add_option("--margin-samples", margin_samples, "samples for the continuous margin estimate");
  CLI11_PARSE(app, argc, argv);

  try {
    if (!simd.empty()) simd::set_backend(simd::parse_backend(simd));
    Scenario sc;
    if (std::filesystem::exists(scenario_arg)) {
      sc = load_scenario(scenario_arg);
      if (n_uavs || n_cus || seed) {
        std::cerr << "note: --n-uavs/--n-cus/--seed override file values but keep its geometry\n";
      }
      if (n_cus) sc.num_cus = *n_cus;
      if (seed) sc.seed = *seed;
    } else {
      sc = builtin_scenario(scenario_arg, n_uavs.value_or(8), n_cus.value_or(2), seed.value_or(0));
    }
    if (trigger) sc.trigger = parse_trigger(*trigger);
    if (loss_prob) sc.loss_prob = *loss_prob;
    for (const auto& j : jams) sc.jams.push_back(parse_jam(j, sc.schedule()));
    if (disable_mlr) sc.loss_recovery = false;
    if (rounds) sc.rounds = *rounds;
    if (soft) sc.soft_constraints = *soft;
    if (planner) sc.planner = *planner;
    for (const auto& kv : settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value");
      apply_setting(sc, kv.substr(0, eq), kv.substr(eq + 1));
    }
    sc.validate();

    const auto t0 = std::chrono::steady_clock::now();
    const auto trace = harness::run(sc, {parallel});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& o = sc.optimization;
    const auto m = harness::metrics(trace, sc.deadlock.target_tolerance);
    const auto collisions = harness::check_discrete_collisions(trace, o.theta, o.d_hat_min);
    const auto oracles = harness::check_theorem_oracles(trace);
    const auto model = harness::MarginModel::from(o);
    const auto margin = harness::estimate_continuous_margin(model, margin_samples, sc.seed);
    const auto physical = harness::check_physical_distance(trace, margin.estimate);

    std::cout << "scenario " << sc.name << ": N=" << sc.num_uavs << " M=" << sc.num_cus
              << " trigger=" << to_string(sc.trigger) << " p=" << sc.loss_prob << " seed=" << sc.seed
              << " rounds=" << trace.rounds.size() << " (" << secs << " s)\n";
    std::cout << "min scaled distance: grid " << harness::min_reference_distance(trace, true) << ", intersample "
              << harness::min_reference_distance(trace, false) << " (d_hat_min " << o.d_hat_min << ")\n";
    std::cout << "continuous margin estimate " << margin.estimate << " from " << margin.admissible
              << " admissible samples; deviation bound " << harness::deviation_bound(model) << "\n";
    std::cout << "discrete collisions: " << collisions.size() << ", physical-distance violations: " << physical.size()
              << "\n";
    std::cout << "oracles: lemma1 " << oracles.lemma1 << ", lemma2 " << oracles.lemma2 << ", theorem1 "
              << oracles.theorem1 << ", uniqueness " << oracles.uniqueness << (oracles.aborted ? ", ABORTED" : "")
              << "\n";
    std::cout << "settle:";
    for (const auto& s : m.segments) std::cout << " " << s.settle_rounds << (s.settled ? "" : "*");
    std::cout << " total " << m.total_settle << (m.all_settled ? "" : " (* = not settled)") << "\n";
    if (trace.aborted) std::cout << "abort: " << trace.abort_reason << "\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(collisions.size(), 5); ++i) {
      const auto& v = collisions[i];
      std::cout << "  collision round " << v.round << " sub " << v.sub << " uavs " << v.i << "," << v.j
                << " distance " << v.distance << "\n";
    }
    if (!out_dir.empty()) harness::write_trace(trace, m, out_dir);
    if (check && (!collisions.empty() || !oracles.clean())) return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
