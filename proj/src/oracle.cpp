#include "losstomo/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "losstomo/error.hpp"

namespace losstomo::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  return y > 0.0 ? x * std::log(y) : kNegInf;
}

std::size_t children_from_size(std::size_t size) {
  if (size < 4 || !std::has_single_bit(size))
    throw InputError("pattern counts must cover 2^d patterns with d >= 2");
  return static_cast<std::size_t>(std::countr_zero(size));
}

// Likelihood pieces that stay fixed while the parameters move.
struct Sufficient {
  std::size_t children = 0;
  double none = 0.0;                // probes seen by no child
  double some = 0.0;                // probes seen by at least one child
  std::vector<double> seen;         // per child: non-zero patterns with y_c = 1
  std::vector<double> missed;       // per child: non-zero patterns with y_c = 0
};

Sufficient summarize(std::span<const std::uint64_t> counts) {
  Sufficient s;
  s.children = children_from_size(counts.size());
  s.seen.assign(s.children, 0.0);
  s.missed.assign(s.children, 0.0);
  s.none = static_cast<double>(counts[0]);
  for (std::size_t pattern = 1; pattern < counts.size(); ++pattern) {
    const auto c = static_cast<double>(counts[pattern]);
    s.some += c;
    for (std::size_t ch = 0; ch < s.children; ++ch)
      (pattern >> ch & 1U ? s.seen : s.missed)[ch] += c;
  }
  return s;
}

// Grid in integer units over [0, 1]: index j is p = min(1, j * unit).
struct UnitGrid {
  double unit;
  long last;

  double value(long j) const { return j >= last ? 1.0 : static_cast<double>(j) * unit; }
};

// Best child rates for a fixed a, found level by level.
struct ProfilePoint {
  double log_likelihood = kNegInf;
  std::vector<long> index;
};

ProfilePoint profile_children(const Sufficient& s, const UnitGrid& grid, double a) {
  const std::size_t d = s.children;
  const double log_a_term = xlogy(s.some, a);

  ProfilePoint best;
  best.index.assign(d, 0);
  std::vector<long> center(d, 0);
  long stride = std::max<long>(1, grid.last / 20);
  bool first = true;

  while (true) {
    std::vector<long> lo(d), hi(d);
    for (std::size_t c = 0; c < d; ++c) {
      if (first) {
        lo[c] = 0;
        hi[c] = grid.last;
      } else {
        const long reach = 3 * stride * 5;
        lo[c] = std::max<long>(0, center[c] - reach);
        hi[c] = std::min<long>(grid.last, center[c] + reach);
      }
    }

    // Per child and per candidate: its share of the non-zero patterns' log
    // probability and its miss probability.
    std::vector<std::vector<long>> idx(d);
    std::vector<std::vector<double>> term(d), miss(d);
    for (std::size_t c = 0; c < d; ++c) {
      long start = (lo[c] / stride) * stride;
      if (start < lo[c]) start += stride;
      for (long j = start; j <= hi[c]; j += stride) {
        idx[c].push_back(j);
        const double p = grid.value(j);
        term[c].push_back(xlogy(s.seen[c], p) + xlogy(s.missed[c], 1.0 - p));
        miss[c].push_back(1.0 - p);
      }
      if (idx[c].empty() || idx[c].back() != hi[c]) {
        // Always include the box edge so p = 1 stays reachable.
        idx[c].push_back(hi[c]);
        const double p = grid.value(hi[c]);
        term[c].push_back(xlogy(s.seen[c], p) + xlogy(s.missed[c], 1.0 - p));
        miss[c].push_back(1.0 - p);
      }
    }

    ProfilePoint level;
    level.index.assign(d, 0);
    std::vector<std::size_t> odo(d, 0);
    while (true) {
      double ll = log_a_term;
      double all_miss = 1.0;
      for (std::size_t c = 0; c < d; ++c) {
        ll += term[c][odo[c]];
        all_miss *= miss[c][odo[c]];
      }
      ll += xlogy(s.none, 1.0 - a + a * all_miss);
      if (ll > level.log_likelihood) {
        level.log_likelihood = ll;
        for (std::size_t c = 0; c < d; ++c) level.index[c] = idx[c][odo[c]];
      }
      std::size_t c = 0;
      while (c < d && ++odo[c] == idx[c].size()) odo[c++] = 0;
      if (c == d) break;
    }
    if (first || level.log_likelihood >= best.log_likelihood) best = level;
    first = false;
    if (stride == 1) break;
    center = best.index;
    stride = std::max<long>(1, stride / 5);
  }
  return best;
}

}  // namespace

double pattern_probability(double a, std::span<const double> child_rates, ChildMask pattern) {
  if (!(a >= 0.0 && a <= 1.0)) throw InputError("path rate outside [0, 1]");
  double prod = a;
  for (std::size_t c = 0; c < child_rates.size(); ++c) {
    const double p = child_rates[c];
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("child rate outside [0, 1]");
    prod *= (pattern >> c & 1U) ? p : 1.0 - p;
  }
  return pattern == 0 ? prod + (1.0 - a) : prod;
}

double pattern_log_likelihood(std::span<const std::uint64_t> counts, double a,
                              std::span<const double> child_rates) {
  const std::size_t d = children_from_size(counts.size());
  if (child_rates.size() != d) throw InputError("child rate count mismatch");
  double ll = 0.0;
  for (std::size_t pattern = 0; pattern < counts.size(); ++pattern)
    ll += xlogy(static_cast<double>(counts[pattern]),
                pattern_probability(a, child_rates, static_cast<ChildMask>(pattern)));
  return ll;
}

PatternCounts pattern_counts(const Tree& tree, const NodeIndicators& ind, NodeId node) {
  if (!tree.is_internal(node)) throw InputError("pattern counts need an internal node");
  auto children = tree.children(node);
  if (children.size() > 16) throw InputError("too many children for pattern counts");
  PatternCounts counts(std::size_t{1} << children.size(), 0);
  for (std::size_t j = 0; j < ind.probe_count(); ++j) {
    std::size_t pattern = 0;
    for (std::size_t c = 0; c < children.size(); ++c)
      if (ind.of(children[c]).test(j)) pattern |= std::size_t{1} << c;
    ++counts[pattern];
  }
  return counts;
}

GridMle grid_full_likelihood_mle(std::span<const std::uint64_t> counts, double grid_step) {
  const std::size_t d = children_from_size(counts.size());
  if (d > kMaxGridChildren) throw InputError("grid search supports at most 4 children");
  if (!(grid_step >= 0.001 && grid_step <= 0.5)) throw InputError("grid step must lie in [0.001, 0.5]");

  const Sufficient s = summarize(counts);
  const double n = s.none + s.some;
  if (n == 0.0) throw InputError("no probes");
  const double gamma_k = s.some / n;

  std::vector<double> a_grid;
  for (long i = 0;; ++i) {
    const double a = gamma_k + static_cast<double>(i) * grid_step;
    if (a >= 1.0 - 1e-12) break;
    a_grid.push_back(a);
  }
  a_grid.push_back(1.0);

  const double unit = grid_step / 20.0;
  const UnitGrid p_grid{unit, static_cast<long>(std::ceil(1.0 / unit - 1e-9))};

  // Profile likelihood over a, coarse then fine around the coarse winner.
  const std::size_t coarse = 5;
  std::vector<ProfilePoint> cache(a_grid.size());
  std::vector<bool> done(a_grid.size(), false);
  auto eval = [&](std::size_t i) -> const ProfilePoint& {
    if (!done[i]) {
      cache[i] = profile_children(s, p_grid, a_grid[i]);
      done[i] = true;
    }
    return cache[i];
  };
  auto argmax = [&](std::size_t from, std::size_t to, std::size_t by) {
    std::size_t best = from;
    for (std::size_t i = from; i <= to; i += by)
      if (eval(i).log_likelihood > eval(best).log_likelihood) best = i;
    if (eval(to).log_likelihood > eval(best).log_likelihood) best = to;
    return best;
  };

  const std::size_t last = a_grid.size() - 1;
  const std::size_t rough = argmax(0, last, coarse);
  const std::size_t from = rough > 2 * coarse ? rough - 2 * coarse : 0;
  const std::size_t to = std::min(last, rough + 2 * coarse);
  const std::size_t best = argmax(from, to, 1);

  GridMle out;
  out.a_star = a_grid[best];
  for (long j : cache[best].index) out.child_rates.push_back(p_grid.value(j));
  out.log_likelihood = cache[best].log_likelihood;
  out.degenerate = s.some == 0.0;
  return out;
}

std::vector<Bracket> sign_scan_root(double gamma_k, std::span<const double> child_gammas,
                                    double step) {
  if (!(step > 0.0)) throw InputError("scan step must be positive");
  std::vector<Bracket> out;
  if (!(gamma_k > 0.0)) return out;

  auto h = [&](double a) {
    double prod = 1.0;
    for (double g : child_gammas) prod *= 1.0 - g / a;
    return 1.0 - gamma_k / a - prod;
  };
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };

  std::vector<double> xs;
  for (long i = 0;; ++i) {
    const double x = gamma_k + static_cast<double>(i) * step;
    if (x >= 1.0) break;
    xs.push_back(x);
  }
  xs.push_back(1.0);

  double prev_x = xs.front();
  int prev_sign = sign(h(prev_x));
  if (prev_sign == 0) out.push_back({prev_x, prev_x});
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const int cur = sign(h(xs[i]));
    if (cur == 0)
      out.push_back({xs[i], xs[i]});
    else if (prev_sign != 0 && cur != prev_sign)
      out.push_back({prev_x, xs[i]});
    prev_x = xs[i];
    prev_sign = cur;
  }
  return out;
}

}  // namespace losstomo::oracle
