#include "losstomo/harness.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <set>
#include <thread>

#include "losstomo/csv.hpp"
#include "losstomo/error.hpp"
#include "losstomo/oracle.hpp"
#include "losstomo/rng.hpp"
#include "losstomo/simulator.hpp"
#include "losstomo/stats.hpp"

namespace losstomo {

namespace {

// Per-replicate outcome at one node for one estimator.
struct Sample {
  std::optional<double> a_hat;
  bool clamped = false;
};

// All samples of one (n, replicate) dataset.
struct ReplicateResult {
  // [estimator][internal node position]
  std::vector<std::vector<Sample>> samples;
  // [internal node position]
  std::vector<std::optional<double>> reference;
  std::vector<std::optional<double>> oracle;
};

ReplicateResult run_replicate(const Tree& tree, const ExperimentConfig& config, std::size_t n,
                              std::size_t replicate) {
  const auto obs = simulate_probes(tree, n, derive_seed(config.master_seed, replicate));
  const auto ind = project_indicators(tree, obs);
  const IndicatorCounts counts(tree, ind);
  auto internal = tree.internal_nodes();

  ReplicateResult r;
  r.samples.resize(config.estimators.size());
  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    for (NodeId k : internal) {
      const PathEstimate est = estimate_node(tree, counts, k, config.estimators[e]);
      r.samples[e].push_back({est.a_hat, est.flags.clamped()});
    }
  }
  if (config.reference) {
    for (NodeId k : internal) r.reference.push_back(estimate_node(tree, counts, k, *config.reference).a_hat);
  }
  if (config.with_oracle) {
    for (NodeId k : internal) {
      if (tree.children(k).size() > oracle::kMaxGridChildren || ind.count(k) == 0) {
        r.oracle.push_back(std::nullopt);
        continue;
      }
      const auto patterns = oracle::pattern_counts(tree, ind, k);
      r.oracle.push_back(oracle::grid_full_likelihood_mle(patterns, config.oracle_step).a_star);
    }
  }
  return r;
}

std::optional<double> mean_abs_gap(std::span<const ReplicateResult> reps, std::size_t e,
                                   std::size_t node_pos,
                                   std::vector<std::optional<double>> ReplicateResult::*field) {
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& rep : reps) {
    const auto& est = rep.samples[e][node_pos].a_hat;
    const auto& ref = (rep.*field)[node_pos];
    if (!est || !ref) continue;
    sum += std::fabs(*est - *ref);
    ++used;
  }
  if (used == 0) return std::nullopt;
  return sum / static_cast<double>(used);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (probe_counts.empty()) throw InputError("at least one probe count is required");
  for (std::size_t i = 0; i < probe_counts.size(); ++i) {
    if (probe_counts[i] == 0) throw InputError("probes must be >= 1");
    if (i > 0 && probe_counts[i] <= probe_counts[i - 1])
      throw InputError("probe counts must be strictly increasing");
  }
  if (replicates == 0) throw InputError("replicates must be >= 1");
  if (estimators.empty()) throw InputError("at least one estimator is required");
  if (with_oracle && !(oracle_step >= 0.001)) throw InputError("oracle step must be >= 0.001");
}

ExperimentResult run_experiment(const Tree& tree, const ExperimentConfig& config) {
  config.validate();
  for (const auto& e : config.estimators)
    if (e.split) validate_split(tree, *e.split);

  const std::size_t n_count = config.probe_counts.size();
  const std::size_t reps = config.replicates;
  std::vector<ReplicateResult> results(n_count * reps);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < results.size(); job = next++)
      results[job] = run_replicate(tree, config, config.probe_counts[job / reps], job % reps);
  };
  const unsigned threads = std::max(1U, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  auto internal = tree.internal_nodes();
  ExperimentResult out;
  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    const std::string label = config.estimators[e].label();
    for (std::size_t pos = 0; pos < internal.size(); ++pos) {
      const NodeId k = internal[pos];
      const double truth = tree.true_path_rate(k);
      for (std::size_t ni = 0; ni < n_count; ++ni) {
        const std::span<const ReplicateResult> slice(results.data() + ni * reps, reps);
        SummaryRow row;
        row.estimator = label;
        row.node = k;
        row.n = config.probe_counts[ni];
        row.true_a = truth;

        double sum = 0.0;
        std::size_t clamped = 0;
        for (const auto& rep : slice) {
          const Sample& s = rep.samples[e][pos];
          if (s.clamped) ++clamped;
          if (!s.a_hat) continue;
          sum += *s.a_hat;
          ++row.reps_used;
        }
        row.undef_frac = static_cast<double>(reps - row.reps_used) / static_cast<double>(reps);
        row.clamp_frac = static_cast<double>(clamped) / static_cast<double>(reps);
        if (row.reps_used > 0) {
          const double used = static_cast<double>(row.reps_used);
          const double mean = sum / used;
          double ss = 0.0;
          double sq_err = 0.0;
          for (const auto& rep : slice) {
            const auto& a = rep.samples[e][pos].a_hat;
            if (!a) continue;
            ss += (*a - mean) * (*a - mean);
            sq_err += (*a - truth) * (*a - truth);
          }
          row.mean_est = mean;
          row.bias = mean - truth;
          row.variance = row.reps_used > 1 ? ss / (used - 1.0) : 0.0;
          row.rmse = std::sqrt(sq_err / used);
        }
        if (config.reference) row.ref_gap = mean_abs_gap(slice, e, pos, &ReplicateResult::reference);
        if (config.with_oracle) row.oracle_gap = mean_abs_gap(slice, e, pos, &ReplicateResult::oracle);
        out.rows.push_back(std::move(row));
      }

      if (n_count >= 3) {
        std::span<const SummaryRow> group(out.rows.end() - static_cast<long>(n_count), out.rows.end());
        bool fittable = true;
        for (const auto& row : group) fittable = fittable && row.rmse && *row.rmse > 0.0;
        if (fittable) out.slopes.push_back({label, k, fit_convergence_slope(group)});
      }
    }
  }
  return out;
}

double fit_convergence_slope(std::span<const SummaryRow> rows) {
  std::set<std::size_t> distinct;
  for (const auto& row : rows) {
    if (!row.rmse || !(*row.rmse > 0.0))
      throw InputError("convergence fit needs positive rmse at every n");
    distinct.insert(row.n);
  }
  if (distinct.size() < 3) throw InputError("convergence fit needs at least three distinct n");

  const double m = static_cast<double>(rows.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& row : rows) {
    sx += std::log(static_cast<double>(row.n));
    sy += std::log(*row.rmse);
  }
  const double mx = sx / m, my = sy / m;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& row : rows) {
    const double dx = std::log(static_cast<double>(row.n)) - mx;
    sxy += dx * (std::log(*row.rmse) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

void write_results_csv(std::ostream& out, const ExperimentResult& result, bool with_oracle) {
  out << "estimator,node,n,reps_used,true_A,mean_est,bias,variance,rmse,undef_frac,clamp_frac,ref_gap";
  if (with_oracle) out << ",oracle_gap";
  out << '\n';
  for (const auto& r : result.rows) {
    out << r.estimator << ',' << r.node << ',' << r.n << ',' << r.reps_used << ','
        << format_real(r.true_a) << ',' << format_real(r.mean_est) << ',' << format_real(r.bias)
        << ',' << format_real(r.variance) << ',' << format_real(r.rmse) << ','
        << format_real(r.undef_frac) << ',' << format_real(r.clamp_frac) << ','
        << format_real(r.ref_gap);
    if (with_oracle) out << ',' << format_real(r.oracle_gap);
    out << '\n';
  }
  for (const auto& s : result.slopes)
    out << "# slope," << s.estimator << ',' << s.node << ',' << format_real(s.slope) << '\n';
}

}  // namespace losstomo
