#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "tsre/errors.hpp"
#include "tsre/harness.hpp"
#include "tsre/serialize.hpp"

using namespace tsre;

namespace {

SweepConfig small_config() {
  SweepConfig c;
  c.n_list = {6, 8};
  c.lambda_list = {0.0, 1.0};
  c.realizations = 6;
  c.master_seed = 7;
  return c;
}

void expect_same(const EnsembleRecord& a, const EnsembleRecord& b) {
  EXPECT_EQ(a.n, b.n);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.realization, b.realization);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.e0, b.e0);
  EXPECT_EQ(a.e1, b.e1);
  EXPECT_EQ(a.entropy_bits, b.entropy_bits);
  EXPECT_EQ(a.chi_eff, b.chi_eff);
}

}  // namespace

TEST(Harness, RunsAreDeterministic) {
  const auto a = run_sweep(small_config(), 1);
  const auto b = run_sweep(small_config(), 1);
  ASSERT_EQ(a.size(), 24u);
  for (std::size_t i = 0; i < a.size(); ++i) expect_same(a[i], b[i]);
}

TEST(Harness, WorkerCountDoesNotChangeResults) {
  const auto a = run_sweep(small_config(), 1);
  const auto b = run_sweep(small_config(), 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) expect_same(a[i], b[i]);
}

TEST(Harness, LambdaSharesDisorder) {
  const auto cfg = small_config();
  const auto r0 = run_realization(cfg, 6, 0.0, 2);
  const auto r1 = run_realization(cfg, 6, 1.0, 2);
  EXPECT_EQ(r0.seed, r1.seed);
  EXPECT_NE(r0.e0, r1.e0);
  EXPECT_NE(size_seed(7, 6, GraphKind::chain), size_seed(7, 8, GraphKind::chain));
  EXPECT_NE(size_seed(7, 6, GraphKind::chain), size_seed(7, 6, GraphKind::ring));
}

TEST(Harness, OddSizeWithoutFieldWarns) {
  SweepConfig c = small_config();
  c.n_list = {5};
  EXPECT_FALSE(c.warnings().empty());
  const auto r = run_realization(c, 5, 0.0, 0);
  EXPECT_TRUE(r.degenerate_flag);
  c.lambda_list = {1.0};
  EXPECT_TRUE(c.warnings().empty());
}

TEST(Harness, ValidationRejectsBadConfigs) {
  SweepConfig c = small_config();
  c.n_list = {};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.lambda_list = {-1.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.observables.correlation = true;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.graph.kind = GraphKind::ring;
  c.solver.method = Method::dmrg;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(preset("nope"), ConfigError);
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate());
}

TEST(Harness, CsvAndJsonlRoundTrip) {
  SweepConfig c = small_config();
  c.graph.kind = GraphKind::ring;
  c.observables.correlation = true;
  c.n_list = {6};
  auto records = run_sweep(c, 1);
  records[0].e1 = std::nan("");
  records[1].error = "convergence: did not converge";
  const auto dir = std::filesystem::temp_directory_path() / "tsre_harness_test";
  std::filesystem::create_directories(dir);
  write_csv(dir / "r.csv", records);
  const auto back = read_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(back[i].n, records[i].n);
    EXPECT_EQ(back[i].error, records[i].error);
    EXPECT_EQ(back[i].degenerate_flag, records[i].degenerate_flag);
    if (std::isnan(records[i].e1))
      EXPECT_TRUE(std::isnan(back[i].e1));
    else
      EXPECT_NEAR(back[i].e1, records[i].e1, 1e-11 * std::abs(records[i].e1));
  }
  for (const auto& r : records) {
    const auto j = from_jsonl(to_jsonl(r));
    EXPECT_EQ(j.c_of_r.size(), r.c_of_r.size());
    for (std::size_t k = 0; k < r.c_of_r.size(); ++k) EXPECT_NEAR(j.c_of_r[k], r.c_of_r[k], 1e-11 * r.c_of_r[k]);
    EXPECT_EQ(j.iterations, r.iterations);
  }
  std::ofstream(dir / "bad.csv") << "n,lambda\n6,1\n";
  EXPECT_THROW(read_csv(dir / "bad.csv"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Harness, NumbersUseTwelveDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(2.0), "2");
}

TEST(Harness, AggregationIsPermutationInvariant) {
  auto records = run_sweep(small_config(), 1);
  const auto a = aggregate(records);
  std::mt19937 rng(3);
  std::shuffle(records.begin(), records.end(), rng);
  const auto b = aggregate(records);
  ASSERT_EQ(a.size(), 4u);
  ASSERT_EQ(b.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].n, b[i].n);
    EXPECT_EQ(a[i].lambda, b[i].lambda);
    EXPECT_NEAR(a[i].gap.mean, b[i].gap.mean, 1e-14);
    EXPECT_NEAR(a[i].entropy.se, b[i].entropy.se, 1e-14);
  }
}

TEST(Harness, NormalizedGapsNeedOneGroup) {
  const auto records = run_sweep(small_config(), 1);
  EXPECT_THROW(normalized_gaps(records), GroupingError);
  std::vector<EnsembleRecord> one(records.begin(), records.begin() + 6);
  const auto g = normalized_gaps(one);
  double sum = 0;
  for (double x : g) sum += x;
  EXPECT_NEAR(sum / g.size(), 1.0, 1e-12);
}

TEST(Harness, FailuresAreCountedNotAveraged) {
  SweepConfig c = small_config();
  c.solver.method = Method::dmrg;
  c.solver.penalty_weight = 1e-9;
  c.n_list = {6};
  c.lambda_list = {1.0};
  c.realizations = 3;
  const auto records = run_sweep(c, 1);
  for (const auto& r : records) EXPECT_FALSE(r.ok());
  const auto stats = aggregate(records);
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_EQ(stats[0].failures, 3u);
  EXPECT_EQ(stats[0].count, 0u);
}

TEST(Harness, DmrgRecordsAreTagged) {
  SweepConfig c = small_config();
  c.solver.method = Method::dmrg;
  c.n_list = {8};
  c.lambda_list = {1.0};
  c.realizations = 2;
  const auto d = run_sweep(c, 1);
  c.solver.method = Method::exact;
  const auto e = run_sweep(c, 1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d[i].method, Method::dmrg);
    EXPECT_NEAR(d[i].e0, e[i].e0, 1e-8);
    EXPECT_NEAR(d[i].gap, e[i].gap, 1e-6);
  }
}

TEST(Harness, ConfigJsonRoundTrip) {
  SweepConfig c = preset("fig3-desk");
  const SweepConfig back = sweep_config_from_json(sweep_config_to_json(c));
  EXPECT_EQ(back.n_list, c.n_list);
  EXPECT_EQ(back.lambda_list, c.lambda_list);
  EXPECT_EQ(back.realizations_per_n, c.realizations_per_n);
  EXPECT_EQ(back.master_seed, c.master_seed);
  EXPECT_EQ(back.observables.gap, c.observables.gap);
  EXPECT_THROW(sweep_config_from_json(Json{{"n_list", {8}}}), ConfigError);
}
