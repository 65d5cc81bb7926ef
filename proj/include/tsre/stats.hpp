#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tsre {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean and sqrt((<A^2> - <A>^2) / n). Throws InsufficientDataError for n < 2.
MeanSe mean_se(std::span<const double> values);

struct Histogram {
  std::vector<double> edges;    ///< bins + 1 entries
  std::vector<double> density;  ///< counts / (total * width)
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  /// Values outside [edges.front(), edges.back()); they count toward `total`,
  /// so the density integrates to 1 - outside/total.
  std::size_t outside = 0;

  double center(std::size_t bin) const { return 0.5 * (edges[bin] + edges[bin + 1]); }
};

Histogram make_histogram(std::span<const double> values, int bins, double lo, double hi);

/// Wigner surmise for the unitary class, (32/pi^2) s^2 exp(-4 s^2 / pi).
double gue_surmise_density(double s);
double gue_surmise_cdf(double s);
double poisson_density(double s);
double poisson_cdf(double s);

/// sup_x |F_empirical(x) - cdf(x)|.
double ks_distance(std::vector<double> values, double (*cdf)(double));

/// y = intercept + slope x by least squares, optionally weighted by 1/sigma^2.
/// Standard errors use the residual variance (unweighted) or the supplied
/// sigmas (weighted).
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  /// cov(slope, intercept)
  double covariance = 0.0;
  double rss = 0.0;
  std::vector<double> residuals;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> sigma = {});

struct FitParameter {
  std::string name;
  double value = 0.0;
  double se = 0.0;
};

struct FitResult {
  std::string model;
  std::vector<FitParameter> parameters;
  /// Inclusive range of the independent variable actually used.
  double range_lo = 0.0;
  double range_hi = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> residuals;
  double rss = 0.0;
  /// Free-form note, e.g. the logarithm base of a correlation length.
  std::string convention;

  const FitParameter& parameter(const std::string& name) const;
  double value(const std::string& name) const { return parameter(name).value; }
  double se(const std::string& name) const { return parameter(name).se; }
  bool has(const std::string& name) const;
};

enum class GapModel { power_law, exponential };
enum class EntropyModel { log_linear, saturation };

/// power_law: log g = a - eta log N. exponential: log g = a - xi N.
/// Needs >= 3 sizes and positive means.
FitResult fit_gap_scaling(std::span<const double> n, std::span<const double> mean_gap, GapModel model,
                          std::span<const double> se = {});

/// log_linear: S = c log2 N + c' over all sizes, plus separate fits over sizes
/// with N/2 even and N/2 odd when each has at least two points (parameters
/// c_even, c_prime_even, c_odd, c_prime_odd). saturation: S = S_inf - B
/// exp(-N / ell), which needs >= 4 sizes.
FitResult fit_entropy_scaling(std::span<const double> n, std::span<const double> entropy, EntropyModel model,
                              std::span<const double> se = {});

/// C(r) = C0 2^{-r/xi} by least squares on log2 C over r in [r_lo, r_hi].
/// Reports xi (base 2) and xi_e = xi / ln 2 (for C0 exp(-r/xi_e)).
FitResult fit_correlation_length(std::span<const double> r, std::span<const double> c, double r_lo,
                                 double r_hi);

/// xi = -xi0 log2 lambda + const over lambda_lo < lambda <= lambda_hi.
FitResult fit_xi_divergence(std::span<const double> lambda, std::span<const double> xi,
                            double lambda_lo = 0.1, double lambda_hi = 1.0,
                            std::span<const double> se = {});

/// 2^{k S_inf} = A log2(lambda_star / lambda), fitted over lambda < lambda_max.
struct SaturationDivergenceOptions {
  double k = 4.0;
  double lambda_star = 4.0;
  double lambda_max = 1.0;
};

enum class DivergenceMode {
  fixed,             ///< k and lambda_star fixed; amplitude A only
  fixed_lambda_star, ///< S vs log2 log2(lambda_star/lambda): slope 1/k
  fixed_k,           ///< 2^{kS} vs log2 lambda: A and lambda_star
  free               ///< lambda_star scanned, k from the inner fit
};

FitResult fit_entropy_saturation_divergence(std::span<const double> lambda, std::span<const double> s_inf,
                                            DivergenceMode mode,
                                            const SaturationDivergenceOptions& options = {});

}  // namespace tsre
