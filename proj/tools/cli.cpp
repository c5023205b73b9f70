#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "losstomo/csv.hpp"
#include "losstomo/error.hpp"
#include "losstomo/estimators.hpp"
#include "losstomo/harness.hpp"
#include "losstomo/simulator.hpp"
#include "losstomo/stats.hpp"
#include "losstomo/topology.hpp"

namespace losstomo::cli {

namespace {

struct SimulateArgs {
  std::string topology;
  long long probes = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct EstimateArgs {
  std::string topology;
  std::string obs;
  std::string estimator = "minc-mle";
  std::string split;
  bool clamp = false;
  std::size_t max_children = 16;
  std::string out;
};

struct CompareArgs {
  std::string topology;
  std::string probes;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  std::string estimators = "minc-mle,merged-mle,lln";
  std::string reference;
  std::string split;
  bool with_oracle = false;
  double oracle_step = 0.002;
  bool clamp = false;
  unsigned threads = 1;
  std::string out;
};

struct CheckArgs {
  std::string topology;
  std::string obs;
  std::size_t max_children = 16;
};

ObservationMatrix load_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open observation file " + path);
  return read_observation_csv(in);
}

// Writes to --out when given, otherwise to the command's output stream.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw InputError("cannot write " + path);
  write(file);
  if (!file) throw InputError("failed writing " + path);
}

std::vector<std::size_t> parse_probe_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto token : split(text, ',')) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size())
      throw InputError("bad probe count '" + std::string(token) + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.probes < 1) throw InputError("probes must be >= 1");
  const Tree tree = load_topology(a.topology);
  const auto obs = simulate_probes(tree, static_cast<std::size_t>(a.probes), a.seed);
  const ObservationMeta meta{a.seed, std::filesystem::path(a.topology).filename().string()};
  emit(a.out, out, [&](std::ostream& os) { write_observation_csv(os, obs, meta); });
  return kExitOk;
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const Tree tree = load_topology(a.topology);
  const auto obs = load_observations(a.obs);
  check_receivers(tree, obs);
  EstimatorId estimator = EstimatorId::parse(a.estimator);
  const auto ind = project_indicators(tree, obs);
  const IndicatorCounts counts(tree, ind);

  if (!a.split.empty() && estimator.kind != EstimatorKind::MergedMle)
    throw InputError("--split only applies to merged-mle");
  if (a.split == "all") {
    const auto rows = merged_mle_all_splits(tree, counts, a.max_children);
    emit(a.out, out, [&](std::ostream& os) { write_split_estimates_csv(os, counts, rows); });
    return kExitOk;
  }
  if (!a.split.empty()) {
    estimator.split = MergeSplit::parse(a.split);
    validate_split(tree, *estimator.split);
  }
  const auto set = estimate_all_paths(tree, counts, estimator, a.clamp);
  emit(a.out, out, [&](std::ostream& os) { write_estimates_csv(os, set); });
  return kExitOk;
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  const Tree tree = load_topology(a.topology);
  ExperimentConfig config;
  config.probe_counts = parse_probe_list(a.probes);
  config.replicates = a.reps;
  config.master_seed = a.seed;
  for (auto name : split(a.estimators, ',')) {
    EstimatorId id = EstimatorId::parse(name);
    if (!a.split.empty() && id.kind == EstimatorKind::MergedMle) {
      id.split = MergeSplit::parse(a.split);
      validate_split(tree, *id.split);
    }
    config.estimators.push_back(std::move(id));
  }
  if (!a.reference.empty()) config.reference = EstimatorId::parse(a.reference);
  config.with_oracle = a.with_oracle;
  config.oracle_step = a.oracle_step;
  config.clamp = a.clamp;
  config.threads = a.threads;

  const auto result = run_experiment(tree, config);
  emit(a.out, out, [&](std::ostream& os) { write_results_csv(os, result, config.with_oracle); });
  return kExitOk;
}

int cmd_check_stats(const CheckArgs& a, std::ostream& out) {
  const Tree tree = load_topology(a.topology);
  const auto obs = load_observations(a.obs);
  const auto ind = project_indicators(tree, obs);
  const auto stats = SiblingStats::compute(tree, ind, a.max_children);

  bool all_pass = true;
  for (const auto& c : check_sufficiency_identity(stats, tree)) {
    out << "node " << c.node << ": ";
    if (!c.checked) {
      out << "SKIP (more than " << a.max_children << " children)\n";
      continue;
    }
    out << (c.pass() ? "PASS" : "FAIL") << " direct=" << c.direct
        << " reconstructed=" << c.reconstructed << '\n';
    all_pass = all_pass && c.pass();
  }
  return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multicast loss tomography: simulate probes, estimate pass rates, compare estimators",
               "losstomo"};
  app.require_subcommand(1, 1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate Bernoulli-loss probes over a topology");
  simulate->add_option("--topology", sim.topology, "Topology file")->required();
  simulate->add_option("--probes", sim.probes, "Number of probes (>= 1)")->required();
  simulate->add_option("--seed", sim.seed, "SplitMix64 seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Observation CSV (default: stdout)");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate path and link pass rates");
  estimate->add_option("--topology", est.topology, "Topology file")->required();
  estimate->add_option("--obs", est.obs, "Observation CSV")->required();
  estimate->add_option("--estimator", est.estimator, "minc-mle | merged-mle | lln | order-r:<r>")
      ->capture_default_str();
  estimate->add_option("--split", est.split,
                       "merged-mle partition 'a,b|c,d' or 'all' (default: first half of the "
                       "children vs the rest)");
  estimate->add_flag("--clamp", est.clamp, "Cap link pass rates above 1 at 1");
  estimate->add_option("--max-children", est.max_children,
                       "Largest child count enumerated by --split all")
      ->capture_default_str();
  estimate->add_option("--out", est.out, "Estimates CSV (default: stdout)");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Monte Carlo comparison of estimators");
  compare->add_option("--topology", cmp.topology, "Topology file")->required();
  compare->add_option("--probes", cmp.probes, "Comma-separated, strictly increasing probe counts")
      ->required();
  compare->add_option("--reps", cmp.reps, "Replicates per probe count")->capture_default_str();
  compare->add_option("--seed", cmp.seed, "Master seed")->capture_default_str();
  compare->add_option("--estimators", cmp.estimators, "Comma-separated estimator names")
      ->capture_default_str();
  compare->add_option("--reference", cmp.reference, "Estimator for the ref_gap column");
  compare->add_option("--split", cmp.split, "Explicit merged-mle partition 'a,b|c,d'");
  compare->add_flag("--with-oracle", cmp.with_oracle,
                    "Add an oracle_gap column from the grid likelihood search");
  compare->add_option("--oracle-step", cmp.oracle_step, "Oracle grid step")->capture_default_str();
  compare->add_flag("--clamp", cmp.clamp, "Cap link pass rates above 1 at 1");
  compare->add_option("--threads", cmp.threads, "Worker threads")->capture_default_str();
  compare->add_option("--out", cmp.out, "Results CSV (default: stdout)");

  CheckArgs chk;
  auto* check = app.add_subcommand("check-stats", "Verify the inclusion-exclusion identity per node");
  check->add_option("--topology", chk.topology, "Topology file")->required();
  check->add_option("--obs", chk.obs, "Observation CSV")->required();
  check->add_option("--max-children", chk.max_children, "Largest child count enumerated")
      ->capture_default_str();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*estimate) return cmd_estimate(est, out);
    if (*compare) return cmd_compare(cmp, out);
    if (*check) return cmd_check_stats(chk, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace losstomo::cli
