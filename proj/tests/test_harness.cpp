#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "losstomo/error.hpp"
#include "losstomo/harness.hpp"

using namespace losstomo;

namespace {

constexpr std::string_view kTertiaryRun =
    "link 1 0 0.9\nlink 2 1 0.8\nlink 3 1 0.8\nlink 4 1 0.8\n";

std::vector<EstimatorId> ids(std::initializer_list<const char*> names) {
  std::vector<EstimatorId> out;
  for (const char* n : names) out.push_back(EstimatorId::parse(n));
  return out;
}

ExperimentConfig tertiary_config() {
  ExperimentConfig c;
  c.probe_counts = {1000, 4000, 16000};
  c.replicates = 100;
  c.master_seed = 7;
  c.estimators = ids({"minc-mle", "merged-mle", "lln"});
  return c;
}

std::vector<SummaryRow> rows_for(const ExperimentResult& r, std::string_view est, NodeId node) {
  std::vector<SummaryRow> out;
  for (const auto& row : r.rows)
    if (row.estimator == est && row.node == node) out.push_back(row);
  return out;
}

SummaryRow synthetic(std::size_t n, double rmse) {
  SummaryRow r;
  r.n = n;
  r.rmse = rmse;
  return r;
}

std::string csv_of(const ExperimentResult& r, bool oracle = false) {
  std::ostringstream out;
  write_results_csv(out, r, oracle);
  return out.str();
}

}  // namespace

TEST_CASE("lossless topology has no error") {
  const Tree t = parse_topology(fixtures::kLosslessTertiary);
  ExperimentConfig c;
  c.probe_counts = {10, 50};
  c.replicates = 5;
  c.estimators = ids({"minc-mle", "merged-mle", "lln", "order-r:2"});
  const auto result = run_experiment(t, c);
  CHECK(result.rows.size() == 4 * 2);
  for (const auto& row : result.rows) {
    CHECK(*row.bias == 0.0);
    CHECK(*row.variance == 0.0);
    CHECK(*row.rmse == 0.0);
    CHECK(row.true_a == 1.0);
  }
  CHECK(result.slopes.empty());
}

TEST_CASE("binary topology: minc-mle and lln rows coincide") {
  const Tree t = parse_topology(fixtures::kBinary);
  ExperimentConfig c;
  c.probe_counts = {100, 400, 1600};
  c.replicates = 40;
  c.master_seed = 3;
  c.estimators = ids({"minc-mle", "lln"});
  const auto result = run_experiment(t, c);
  const auto m = rows_for(result, "minc-mle", 1);
  const auto l = rows_for(result, "lln", 1);
  REQUIRE(m.size() == 3);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(*m[i].mean_est == doctest::Approx(*l[i].mean_est).epsilon(1e-12));
    CHECK(*m[i].rmse == doctest::Approx(*l[i].rmse).epsilon(1e-9));
    CHECK(m[i].reps_used == l[i].reps_used);
  }
}

TEST_CASE("tertiary regression run") {
  const Tree t = parse_topology(kTertiaryRun);
  const auto result = run_experiment(t, tertiary_config());
  REQUIRE(result.rows.size() == 9);
  for (const char* est : {"minc-mle", "merged-mle", "lln"}) {
    const auto r = rows_for(result, est, 1);
    REQUIRE(r.size() == 3);
    CHECK(*r[0].rmse > *r[1].rmse);
    CHECK(*r[1].rmse > *r[2].rmse);
    for (const auto& row : r) {
      CHECK(row.reps_used == 100);
      CHECK(row.true_a == doctest::Approx(0.9));
    }
  }
  // Golden output for seed 7.
  const auto m = rows_for(result, "minc-mle", 1);
  CHECK(*m[0].rmse == doctest::Approx(0.0105923804068).epsilon(1e-9));
  CHECK(*m[1].rmse == doctest::Approx(0.00560726656279).epsilon(1e-9));
  CHECK(*m[2].rmse == doctest::Approx(0.00248450033079).epsilon(1e-9));
  const auto l = rows_for(result, "lln", 1);
  CHECK(*l[0].rmse == doctest::Approx(0.01090521392).epsilon(1e-9));
  CHECK(l[0].clamp_frac == doctest::Approx(0.12));
  REQUIRE(result.slopes.size() == 3);
  for (const auto& s : result.slopes) {
    CHECK(s.slope <= -0.4);
    CHECK(s.slope >= -0.6);
  }
  CHECK(result.slopes[0].slope == doctest::Approx(-0.522999800242).epsilon(1e-9));
}

TEST_CASE("summary rows satisfy the moment identity") {
  const Tree t = parse_topology(kTertiaryRun);
  auto c = tertiary_config();
  c.probe_counts = {60, 200};
  c.replicates = 37;
  c.estimators = ids({"minc-mle", "merged-mle", "lln", "order-r:2"});
  for (const auto& row : run_experiment(t, c).rows) {
    CHECK(row.undef_frac >= 0.0);
    CHECK(row.undef_frac <= 1.0);
    CHECK(row.clamp_frac >= 0.0);
    CHECK(row.clamp_frac <= 1.0);
    if (row.reps_used < 2) continue;
    const double used = static_cast<double>(row.reps_used);
    const double rhs = *row.bias * *row.bias + *row.variance * (used - 1) / used;
    CHECK(*row.rmse * *row.rmse == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("undefined estimates are counted, not averaged") {
  // A lossy binary tree at tiny n: some replicates see nothing below node 1.
  const Tree t = parse_topology("link 1 0 0.3\nlink 2 1 0.3\nlink 3 1 0.3\n");
  ExperimentConfig c;
  c.probe_counts = {2};
  c.replicates = 50;
  c.estimators = ids({"minc-mle"});
  const auto row = run_experiment(t, c).rows.at(0);
  CHECK(row.undef_frac > 0.0);
  CHECK(row.reps_used == static_cast<std::size_t>(std::lround(50 * (1.0 - row.undef_frac))));
}

TEST_CASE("results do not depend on the thread count") {
  const Tree t = parse_topology(kTertiaryRun);
  auto c = tertiary_config();
  c.replicates = 30;
  c.reference = EstimatorId::parse("minc-mle");
  c.threads = 1;
  const auto one = csv_of(run_experiment(t, c));
  c.threads = 4;
  const auto four = csv_of(run_experiment(t, c));
  CHECK(one == four);
  CHECK(one == csv_of(run_experiment(t, c)));
}

TEST_CASE("reference gap") {
  const Tree t = parse_topology(kTertiaryRun);
  auto c = tertiary_config();
  c.probe_counts = {500, 1000};
  c.replicates = 20;
  c.reference = EstimatorId::parse("minc-mle");
  const auto result = run_experiment(t, c);
  for (const auto& row : result.rows) {
    REQUIRE(row.ref_gap);
    if (row.estimator == "minc-mle")
      CHECK(*row.ref_gap == 0.0);
    else
      CHECK(*row.ref_gap > 0.0);
  }
  c.reference.reset();
  for (const auto& row : run_experiment(t, c).rows) CHECK_FALSE(row.ref_gap);
}

TEST_CASE("oracle gap is small on unflagged data") {
  const Tree t = parse_topology(kTertiaryRun);
  ExperimentConfig c;
  c.probe_counts = {200};
  c.replicates = 4;
  c.estimators = ids({"minc-mle", "lln"});
  c.with_oracle = true;
  c.oracle_step = 0.01;
  const auto result = run_experiment(t, c);
  const auto& minc = result.rows.at(0);
  REQUIRE(minc.oracle_gap);
  CHECK(*minc.oracle_gap <= 0.01 + 1e-12);
  const auto text = csv_of(result, true);
  CHECK(text.find(",ref_gap,oracle_gap\n") != std::string::npos);
}

TEST_CASE("results CSV layout") {
  const Tree t = parse_topology(fixtures::kLosslessTertiary);
  ExperimentConfig c;
  c.probe_counts = {5};
  c.estimators = ids({"minc-mle"});
  const auto text = csv_of(run_experiment(t, c));
  CHECK(text ==
        "estimator,node,n,reps_used,true_A,mean_est,bias,variance,rmse,undef_frac,clamp_frac,ref_gap\n"
        "minc-mle,1,5,1,1,1,0,0,0,0,0,\n");
}

TEST_CASE("convergence slope") {
  SUBCASE("halving RMSE per fourfold n") {
    const SummaryRow rows[] = {synthetic(100, 0.08), synthetic(400, 0.04), synthetic(1600, 0.02),
                               synthetic(6400, 0.01)};
    CHECK(fit_convergence_slope(rows) == doctest::Approx(-0.5).epsilon(1e-12));
  }
  SUBCASE("constant RMSE") {
    const SummaryRow rows[] = {synthetic(10, 0.3), synthetic(20, 0.3), synthetic(40, 0.3)};
    CHECK(std::fabs(fit_convergence_slope(rows)) < 1e-12);
  }
  SUBCASE("rejected inputs") {
    const SummaryRow two[] = {synthetic(10, 0.3), synthetic(20, 0.2)};
    CHECK_THROWS_AS(fit_convergence_slope(two), InputError);
    const SummaryRow zero[] = {synthetic(10, 0.3), synthetic(20, 0.0), synthetic(40, 0.1)};
    CHECK_THROWS_AS(fit_convergence_slope(zero), InputError);
    const SummaryRow repeated[] = {synthetic(10, 0.3), synthetic(10, 0.2), synthetic(20, 0.1)};
    CHECK_THROWS_AS(fit_convergence_slope(repeated), InputError);
  }
}

TEST_CASE("configuration validation") {
  ExperimentConfig c;
  c.estimators = ids({"minc-mle"});
  CHECK_THROWS_AS(c.validate(), InputError);
  c.probe_counts = {100, 100};
  CHECK_THROWS_AS(c.validate(), InputError);
  c.probe_counts = {100, 50};
  CHECK_THROWS_AS(c.validate(), InputError);
  c.probe_counts = {0, 50};
  CHECK_THROWS_AS(c.validate(), InputError);
  c.probe_counts = {50, 100};
  CHECK_NOTHROW(c.validate());
  c.replicates = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c.replicates = 1;
  c.estimators.clear();
  CHECK_THROWS_AS(c.validate(), InputError);
}
