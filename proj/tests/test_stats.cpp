#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tsre/errors.hpp"
#include "tsre/stats.hpp"

using namespace tsre;

namespace {

/// Composite Simpson rule on [a, b].
template <class F>
double simpson(F&& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST(Stats, SurmisesAreNormalizedWithUnitMean) {
  EXPECT_NEAR(simpson(gue_surmise_density, 0, 12), 1.0, 1e-10);
  EXPECT_NEAR(simpson([](double s) { return s * gue_surmise_density(s); }, 0, 12), 1.0, 1e-10);
  EXPECT_NEAR(simpson(poisson_density, 0, 60), 1.0, 1e-10);
  EXPECT_NEAR(simpson([](double s) { return s * poisson_density(s); }, 0, 60), 1.0, 1e-10);
}

TEST(Stats, CdfsIntegrateTheDensities) {
  for (double s : {0.1, 0.5, 1.0, 2.0, 3.5}) {
    EXPECT_NEAR(gue_surmise_cdf(s), simpson(gue_surmise_density, 0, s), 1e-12);
    EXPECT_NEAR(poisson_cdf(s), simpson(poisson_density, 0, s), 1e-12);
  }
  EXPECT_EQ(gue_surmise_cdf(0), 0.0);
  EXPECT_NEAR(gue_surmise_density(1.0), 32.0 / (std::numbers::pi * std::numbers::pi) * std::exp(-4.0 / std::numbers::pi),
              1e-15);
}

TEST(Stats, MeanSeExamples) {
  const std::vector<double> v = {1, 2, 3, 4};
  const MeanSe m = mean_se(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt(1.25 / 4), 1e-15);

  // Two-pass oracle on values with a large offset.
  std::vector<double> w;
  for (int i = 0; i < 1000; ++i) w.push_back(1e8 + std::sin(i));
  double mean = 0;
  for (double x : w) mean += x;
  mean /= w.size();
  double var = 0;
  for (double x : w) var += (x - mean) * (x - mean);
  var /= w.size();
  const MeanSe mw = mean_se(w);
  EXPECT_NEAR(mw.mean, mean, 1e-6);
  EXPECT_NEAR(mw.se, std::sqrt(var / w.size()), 1e-9);

  EXPECT_THROW(mean_se(std::vector<double>{1.0}), InsufficientDataError);
}

TEST(Stats, HistogramCountsAndDensity) {
  const std::vector<double> v = {0.5, 1.5, 1.5, 5.0};
  const Histogram h = make_histogram(v, 2, 0.0, 2.0);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(h.outside, 1u);
  EXPECT_EQ(h.total, 4u);
  EXPECT_DOUBLE_EQ(h.density[0], 0.25);
  EXPECT_DOUBLE_EQ(h.density[1], 0.5);
  EXPECT_DOUBLE_EQ(h.center(1), 1.5);
  EXPECT_THROW(make_histogram(v, 0, 0, 1), DomainError);
}

TEST(Stats, KsDistanceOfExactQuantiles) {
  std::vector<double> q;
  const int n = 200;
  for (int i = 0; i < n; ++i) q.push_back(-std::log1p(-(i + 0.5) / n));
  EXPECT_NEAR(ks_distance(q, poisson_cdf), 0.5 / n, 1e-12);
  EXPECT_GT(ks_distance(q, gue_surmise_cdf), 0.1);
}

TEST(Stats, LinearFitExample) {
  const std::vector<double> x = {0, 1, 2}, y = {1, 3, 2};
  const LinearFit f = linear_fit(x, y);
  EXPECT_NEAR(f.slope, 0.5, 1e-15);
  EXPECT_NEAR(f.intercept, 1.5, 1e-15);
  EXPECT_NEAR(f.rss, 1.5, 1e-14);
  EXPECT_NEAR(f.slope_se, std::sqrt(1.5 / 2.0), 1e-14);
  EXPECT_NEAR(f.residuals[1], 1.0, 1e-15);
}

TEST(Stats, WeightedLinearFitUsesSigmas) {
  const std::vector<double> x = {0, 1, 2, 3}, y = {1, 3, 5, 7}, s = {0.1, 0.1, 0.1, 0.1};
  const LinearFit f = linear_fit(x, y, s);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  // sigma^2 / Sxx with Sxx = 5.
  EXPECT_NEAR(f.slope_se, 0.1 / std::sqrt(5.0), 1e-14);
}

TEST(Stats, GapScalingRecovery) {
  const std::vector<double> n = {8, 10, 12, 14};
  std::vector<double> pw, ex;
  for (double v : n) {
    pw.push_back(3.0 * std::pow(v, -0.4));
    ex.push_back(2.0 * std::exp(-0.3 * v));
  }
  EXPECT_NEAR(fit_gap_scaling(n, pw, GapModel::power_law).value("eta"), 0.4, 1e-12);
  EXPECT_NEAR(fit_gap_scaling(n, ex, GapModel::exponential).value("xi"), 0.3, 1e-12);
  EXPECT_THROW(fit_gap_scaling(std::vector<double>{8, 10}, std::vector<double>{1, 1}, GapModel::power_law),
               InsufficientDataError);
}

TEST(Stats, EntropyScalingRecovery) {
  const std::vector<double> n = {8, 10, 12, 14, 16};
  std::vector<double> lin, sat;
  for (double v : n) {
    lin.push_back(0.2 * std::log2(v) + 0.1);
    sat.push_back(1.0 - 0.8 * std::exp(-v / 3.0));
  }
  const auto fl = fit_entropy_scaling(n, lin, EntropyModel::log_linear);
  EXPECT_NEAR(fl.value("c"), 0.2, 1e-12);
  EXPECT_NEAR(fl.value("c_prime"), 0.1, 1e-12);
  EXPECT_TRUE(fl.has("c_even"));
  const auto fs = fit_entropy_scaling(n, sat, EntropyModel::saturation);
  EXPECT_NEAR(fs.value("S_inf"), 1.0, 1e-6);
  EXPECT_NEAR(fs.value("B"), 0.8, 1e-5);
  EXPECT_NEAR(fs.value("ell"), 3.0, 1e-5);
}

TEST(Stats, CorrelationLengthRecovery) {
  std::vector<double> r, c;
  for (int i = 1; i <= 8; ++i) {
    r.push_back(i);
    c.push_back(0.5 * std::exp2(-i / 2.0));
  }
  const auto f = fit_correlation_length(r, c, 1, 6);
  EXPECT_NEAR(f.value("xi"), 2.0, 1e-12);
  EXPECT_NEAR(f.value("xi_e"), 2.0 / std::numbers::ln2, 1e-12);
  EXPECT_EQ(f.x.size(), 6u);
}

TEST(Stats, XiDivergenceUsesTheConfiguredWindow) {
  const std::vector<double> lam = {0.1, 0.25, 0.5, 1.0, 2.0};
  std::vector<double> xi;
  for (double l : lam) xi.push_back(-0.26 * std::log2(l) + 1.0);
  xi[0] += 5.0;  // outside the window, must not matter
  xi[4] -= 5.0;
  const auto f = fit_xi_divergence(lam, xi);
  EXPECT_NEAR(f.value("xi0"), 0.26, 1e-12);
  EXPECT_EQ(f.x.size(), 3u);
  EXPECT_DOUBLE_EQ(f.range_lo, 0.25);
  EXPECT_DOUBLE_EQ(f.range_hi, 1.0);
}

TEST(Stats, SaturationDivergenceRecovery) {
  const std::vector<double> lam = {0.05, 0.1, 0.25, 0.5, 2.0};
  const double a = 2.0, k = 4.0, star = 4.0;
  std::vector<double> s;
  for (double l : lam) s.push_back(l < 1 ? std::log2(a * std::log2(star / l)) / k : 0.0);
  EXPECT_NEAR(fit_entropy_saturation_divergence(lam, s, DivergenceMode::fixed).value("A"), a, 1e-10);
  const auto fl = fit_entropy_saturation_divergence(lam, s, DivergenceMode::fixed_lambda_star);
  EXPECT_NEAR(fl.value("k"), k, 1e-10);
  EXPECT_NEAR(fl.value("A"), a, 1e-10);
  const auto fk = fit_entropy_saturation_divergence(lam, s, DivergenceMode::fixed_k);
  EXPECT_NEAR(fk.value("A"), a, 1e-10);
  EXPECT_NEAR(fk.value("lambda_star"), star, 1e-9);
  const auto ff = fit_entropy_saturation_divergence(lam, s, DivergenceMode::free);
  EXPECT_NEAR(ff.value("k"), k, 1e-3);
  EXPECT_NEAR(ff.value("lambda_star"), star, 1e-2);
  EXPECT_EQ(ff.x.size(), 4u);
}
