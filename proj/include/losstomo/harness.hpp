#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "losstomo/estimators.hpp"
#include "losstomo/topology.hpp"

namespace losstomo {

struct ExperimentConfig {
  std::vector<std::size_t> probe_counts;  // strictly increasing
  std::size_t replicates = 1;
  std::uint64_t master_seed = 0;
  std::vector<EstimatorId> estimators;
  std::optional<EstimatorId> reference;  // fills ref_gap = mean |A - A_ref|
  bool with_oracle = false;              // fills oracle_gap on nodes with <= 4 children
  double oracle_step = 0.002;
  bool clamp = false;  // caps link rates only; path summaries are unaffected
  unsigned threads = 1;

  // Throws InputError on an invalid configuration.
  void validate() const;
};

// Aggregate of one estimator at one node and probe count over all replicates.
struct SummaryRow {
  std::string estimator;
  NodeId node = 0;
  std::size_t n = 0;
  std::size_t reps_used = 0;  // replicates with a defined estimate
  double true_a = 0.0;
  std::optional<double> mean_est;
  std::optional<double> bias;
  std::optional<double> variance;  // sample variance (n - 1 denominator; 0 for one replicate)
  std::optional<double> rmse;
  double undef_frac = 0.0;
  double clamp_frac = 0.0;
  std::optional<double> ref_gap;
  std::optional<double> oracle_gap;
};

struct SlopeRow {
  std::string estimator;
  NodeId node = 0;
  double slope = 0.0;
};

struct ExperimentResult {
  std::vector<SummaryRow> rows;  // ordered by (estimator, node, n)
  std::vector<SlopeRow> slopes;  // present when >= 3 probe counts allow a fit
};

// Every (n, replicate) pair is simulated once with seed
// derive_seed(master_seed, replicate) and all estimators see that same data.
// Replicates may run on several threads; aggregation order is fixed, so the
// result does not depend on the thread count.
ExperimentResult run_experiment(const Tree& tree, const ExperimentConfig& config);

// Least-squares slope of log(rmse) against log(n). Throws InputError with
// fewer than three distinct n or any non-positive rmse.
double fit_convergence_slope(std::span<const SummaryRow> rows);

// Results CSV. The oracle_gap column is appended only when with_oracle is set;
// slope rows follow as "# slope,<estimator>,<node>,<value>" comment lines.
void write_results_csv(std::ostream& out, const ExperimentResult& result, bool with_oracle);

}  // namespace losstomo
