#include "tsre/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "tsre/errors.hpp"

namespace tsre {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("input sequences differ in length");
}

/// Minimizes f over [a, b] by golden-section search.
double golden_minimize(const std::function<double(double)>& f, double a, double b, double tol = 1e-10) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (std::abs(b - a) > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Grid scan of f over [lo, hi] followed by golden refinement around the best
/// grid point.
double scan_minimize(const std::function<double(double)>& f, double lo, double hi, int grid = 400) {
  double best_t = lo, best_f = std::numeric_limits<double>::infinity();
  std::vector<double> ts(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    const double t = lo + (hi - lo) * i / (grid - 1);
    ts[static_cast<std::size_t>(i)] = t;
    const double v = f(t);
    if (v < best_f) {
      best_f = v;
      best_t = t;
    }
  }
  const double step = (hi - lo) / (grid - 1);
  return golden_minimize(f, std::max(lo, best_t - step), std::min(hi, best_t + step));
}

/// s^2 (J^T J)^{-1} with a central-difference Jacobian of the model at p.
Eigen::MatrixXd nonlinear_covariance(const std::function<double(double, const Eigen::VectorXd&)>& model,
                                     const Eigen::VectorXd& p, std::span<const double> x, double rss) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index k = p.size();
  if (n <= k) return Eigen::MatrixXd::Constant(k, k, kNaN);
  Eigen::MatrixXd jac(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double h = 1e-6 * std::max(std::abs(p(j)), 1e-3);
    Eigen::VectorXd up = p, dn = p;
    up(j) += h;
    dn(j) -= h;
    for (Eigen::Index i = 0; i < n; ++i) jac(i, j) = (model(x[i], up) - model(x[i], dn)) / (2 * h);
  }
  const double s2 = rss / static_cast<double>(n - k);
  return s2 * (jac.transpose() * jac).inverse();
}

void fill_residuals(FitResult& r, const std::function<double(double)>& predict) {
  r.residuals.clear();
  r.rss = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    const double e = r.y[i] - predict(r.x[i]);
    r.residuals.push_back(e);
    r.rss += e * e;
  }
  if (!r.x.empty()) {
    r.range_lo = *std::min_element(r.x.begin(), r.x.end());
    r.range_hi = *std::max_element(r.x.begin(), r.x.end());
  }
}

}  // namespace

MeanSe mean_se(std::span<const double> values) {
  if (values.size() < 2) throw InsufficientDataError("mean_se needs at least two values");
  // Welford accumulation; population variance divided by n.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(values.size());
  return {mean, std::sqrt(std::max(0.0, m2 / n) / n)};
}

Histogram make_histogram(std::span<const double> values, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw DomainError("histogram needs bins >= 1 and hi > lo");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (int i = 0; i <= bins; ++i) h.edges.push_back(lo + width * i);
  for (double v : values) {
    ++h.total;
    if (!(v >= lo && v < hi)) {
      ++h.outside;
      continue;
    }
    const auto bin = std::min<std::size_t>(static_cast<std::size_t>((v - lo) / width), h.counts.size() - 1);
    ++h.counts[bin];
  }
  for (std::size_t c : h.counts)
    h.density.push_back(h.total ? static_cast<double>(c) / (static_cast<double>(h.total) * width) : 0.0);
  return h;
}

double gue_surmise_density(double s) {
  if (s < 0) return 0.0;
  constexpr double pi = std::numbers::pi;
  return 32.0 / (pi * pi) * s * s * std::exp(-4.0 * s * s / pi);
}

double gue_surmise_cdf(double s) {
  if (s <= 0) return 0.0;
  constexpr double pi = std::numbers::pi;
  return std::erf(2.0 * s / std::sqrt(pi)) - 4.0 * s / pi * std::exp(-4.0 * s * s / pi);
}

double poisson_density(double s) { return s < 0 ? 0.0 : std::exp(-s); }
double poisson_cdf(double s) { return s <= 0 ? 0.0 : -std::expm1(-s); }

double ks_distance(std::vector<double> values, double (*cdf)(double)) {
  if (values.empty()) throw InsufficientDataError("KS distance needs data");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
  require_same_size(x, y);
  const bool weighted = !sigma.empty();
  if (weighted) require_same_size(x, sigma);
  const std::size_t n = x.size();
  if (n < 2) throw InsufficientDataError("linear fit needs at least two points");

  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
    if (!std::isfinite(w) || w <= 0) throw DomainError("sigma must be positive");
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
  }
  const double xm = swx / sw, ym = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
    sxx += w * (x[i] - xm) * (x[i] - xm);
    sxy += w * (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0)) throw InsufficientDataError("linear fit needs two distinct abscissae");

  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    f.residuals.push_back(e);
    f.rss += e * e;
  }
  // Unit-weight variance: from the residuals, or 1 when sigmas are given.
  const double s2 = weighted ? 1.0 : (n > 2 ? f.rss / static_cast<double>(n - 2) : kNaN);
  f.slope_se = std::sqrt(s2 / sxx);
  f.intercept_se = std::sqrt(s2 * (1.0 / sw + xm * xm / sxx));
  f.covariance = -xm * s2 / sxx;
  return f;
}

const FitParameter& FitResult::parameter(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw DomainError("fit has no parameter '" + name + "'");
}

bool FitResult::has(const std::string& name) const {
  return std::any_of(parameters.begin(), parameters.end(), [&](const auto& p) { return p.name == name; });
}

FitResult fit_gap_scaling(std::span<const double> n, std::span<const double> mean_gap, GapModel model,
                          std::span<const double> se) {
  require_same_size(n, mean_gap);
  if (n.size() < 3) throw InsufficientDataError("gap scaling needs at least three sizes");
  std::vector<double> x, y, sig;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(mean_gap[i] > 0) || !(n[i] > 0)) throw DomainError("gap means and sizes must be positive");
    x.push_back(model == GapModel::power_law ? std::log(n[i]) : n[i]);
    y.push_back(std::log(mean_gap[i]));
    if (!se.empty()) sig.push_back(se[i] / mean_gap[i]);
  }
  const LinearFit lf = linear_fit(x, y, sig);
  FitResult r;
  r.model = model == GapModel::power_law ? "power_law" : "exponential";
  r.convention = model == GapModel::power_law ? "log g = log a - eta log N" : "log g = log a - xi N";
  r.parameters = {{model == GapModel::power_law ? "eta" : "xi", -lf.slope, lf.slope_se},
                  {"log_amplitude", lf.intercept, lf.intercept_se}};
  r.x.assign(n.begin(), n.end());
  r.y = y;
  r.residuals = lf.residuals;
  r.rss = lf.rss;
  r.range_lo = *std::min_element(n.begin(), n.end());
  r.range_hi = *std::max_element(n.begin(), n.end());
  return r;
}

FitResult fit_entropy_scaling(std::span<const double> n, std::span<const double> entropy, EntropyModel model,
                              std::span<const double> se) {
  require_same_size(n, entropy);
  if (!se.empty()) require_same_size(n, se);
  FitResult r;
  r.x.assign(n.begin(), n.end());
  r.y.assign(entropy.begin(), entropy.end());

  if (model == EntropyModel::log_linear) {
    if (n.size() < 3) throw InsufficientDataError("entropy scaling needs at least three sizes");
    auto fit_subset = [&](auto keep) {
      std::vector<double> x, y, sig;
      for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(n[i] > 0)) throw DomainError("sizes must be positive");
        if (!keep(n[i])) continue;
        x.push_back(std::log2(n[i]));
        y.push_back(entropy[i]);
        if (!se.empty()) sig.push_back(se[i]);
      }
      return std::make_pair(x.size(), x.size() >= 2 ? linear_fit(x, y, sig) : LinearFit{});
    };
    const auto [all_n, all] = fit_subset([](double) { return true; });
    r.model = "log_linear";
    r.convention = "S = c log2 N + c'";
    r.parameters = {{"c", all.slope, all.slope_se}, {"c_prime", all.intercept, all.intercept_se}};
    const auto half_parity = [](double v) { return static_cast<long>(std::llround(v)) / 2 % 2; };
    const auto [even_n, even] = fit_subset([&](double v) { return half_parity(v) == 0; });
    const auto [odd_n, odd] = fit_subset([&](double v) { return half_parity(v) == 1; });
    if (even_n >= 2) {
      r.parameters.push_back({"c_even", even.slope, even.slope_se});
      r.parameters.push_back({"c_prime_even", even.intercept, even.intercept_se});
    }
    if (odd_n >= 2) {
      r.parameters.push_back({"c_odd", odd.slope, odd.slope_se});
      r.parameters.push_back({"c_prime_odd", odd.intercept, odd.intercept_se});
    }
    fill_residuals(r, [&](double v) { return all.intercept + all.slope * std::log2(v); });
    return r;
  }

  if (n.size() < 4) throw InsufficientDataError("saturation fit needs at least four sizes");
  const double n_lo = *std::min_element(n.begin(), n.end());
  const double n_hi = *std::max_element(n.begin(), n.end());
  std::vector<double> sig(se.begin(), se.end());
  auto inner = [&](double ell) {
    std::vector<double> x;
    for (double v : n) x.push_back(std::exp(-(v - n_lo) / ell));
    return linear_fit(x, entropy, sig);
  };
  auto objective = [&](double log_ell) {
    const LinearFit lf = inner(std::exp(log_ell));
    if (sig.empty()) return lf.rss;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < lf.residuals.size(); ++i) chi2 += std::pow(lf.residuals[i] / sig[i], 2);
    return chi2;
  };
  const double span_n = std::max(n_hi - n_lo, 1.0);
  const double log_ell = scan_minimize(objective, std::log(0.02 * span_n), std::log(100.0 * span_n));
  const double ell = std::exp(log_ell);
  const LinearFit lf = inner(ell);
  // Shifted parameterization above keeps the inner fit well conditioned.
  const double s_inf = lf.intercept;
  const double b = -lf.slope * std::exp(n_lo / ell);

  const auto sat = [](double v, const Eigen::VectorXd& p) { return p(0) - p(1) * std::exp(-v / p(2)); };
  Eigen::VectorXd p(3);
  p << s_inf, b, ell;
  fill_residuals(r, [&](double v) { return sat(v, p); });
  Eigen::MatrixXd cov;
  if (sig.empty()) {
    cov = nonlinear_covariance(sat, p, n, r.rss);
  } else {
    std::vector<double> xs(n.begin(), n.end());
    // Weighted: scale each row by 1/sigma, unit variance.
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n.size()), 3);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double h = 1e-6 * std::max(std::abs(p(j)), 1e-3);
      Eigen::VectorXd up = p, dn = p;
      up(j) += h;
      dn(j) -= h;
      for (std::size_t i = 0; i < n.size(); ++i)
        jac(static_cast<Eigen::Index>(i), j) = (sat(xs[i], up) - sat(xs[i], dn)) / (2 * h) / sig[i];
    }
    cov = (jac.transpose() * jac).inverse();
  }
  r.model = "saturation";
  r.convention = "S = S_inf - B exp(-N / ell)";
  r.parameters = {{"S_inf", s_inf, std::sqrt(cov(0, 0))},
                  {"B", b, std::sqrt(cov(1, 1))},
                  {"ell", ell, std::sqrt(cov(2, 2))}};
  return r;
}

FitResult fit_correlation_length(std::span<const double> r, std::span<const double> c, double r_lo,
                                 double r_hi) {
  require_same_size(r, c);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < r_lo - 1e-12 || r[i] > r_hi + 1e-12) continue;
    if (!(c[i] > 0)) throw DomainError("C(r) must be positive inside the fit range");
    x.push_back(r[i]);
    y.push_back(std::log2(c[i]));
  }
  if (x.size() < 2) throw InsufficientDataError("fit range holds fewer than two points");
  const LinearFit lf = linear_fit(x, y);
  if (!(lf.slope < 0)) throw DomainError("C(r) does not decay on the fit range");
  FitResult f;
  f.model = "correlation_length";
  f.convention = "C(r) = C0 2^(-r/xi); xi_e = xi / ln 2 for C0 exp(-r/xi_e)";
  const double xi = -1.0 / lf.slope;
  const double xi_se = lf.slope_se / (lf.slope * lf.slope);
  f.parameters = {{"xi", xi, xi_se},
                  {"xi_e", xi / std::numbers::ln2, xi_se / std::numbers::ln2},
                  {"log2_C0", lf.intercept, lf.intercept_se}};
  f.x = x;
  f.y = y;
  f.residuals = lf.residuals;
  f.rss = lf.rss;
  f.range_lo = x.front();
  f.range_hi = x.back();
  return f;
}

FitResult fit_xi_divergence(std::span<const double> lambda, std::span<const double> xi, double lambda_lo,
                            double lambda_hi, std::span<const double> se) {
  require_same_size(lambda, xi);
  std::vector<double> x, y, sig, lam;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0)) throw DomainError("lambda must be positive");
    if (!(lambda[i] > lambda_lo && lambda[i] <= lambda_hi)) continue;
    lam.push_back(lambda[i]);
    x.push_back(std::log2(lambda[i]));
    y.push_back(xi[i]);
    if (!se.empty()) sig.push_back(se[i]);
  }
  if (x.size() < 2) throw InsufficientDataError("xi divergence fit needs two lambdas in range");
  const LinearFit lf = linear_fit(x, y, sig);
  FitResult f;
  f.model = "xi_divergence";
  f.convention = "xi = -xi0 log2(lambda) + const";
  f.parameters = {{"xi0", -lf.slope, lf.slope_se}, {"const", lf.intercept, lf.intercept_se}};
  f.x = lam;
  f.y = y;
  f.residuals = lf.residuals;
  f.rss = lf.rss;
  f.range_lo = *std::min_element(lam.begin(), lam.end());
  f.range_hi = *std::max_element(lam.begin(), lam.end());
  return f;
}

FitResult fit_entropy_saturation_divergence(std::span<const double> lambda, std::span<const double> s_inf,
                                            DivergenceMode mode, const SaturationDivergenceOptions& options) {
  require_same_size(lambda, s_inf);
  std::vector<double> lam, s;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0)) throw DomainError("lambda must be positive");
    if (!(lambda[i] < options.lambda_max)) continue;
    lam.push_back(lambda[i]);
    s.push_back(s_inf[i]);
  }
  std::vector<double> distinct = lam;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t need = mode == DivergenceMode::fixed ? 2 : 3;
  if (distinct.size() < need)
    throw InsufficientDataError("saturation divergence fit needs " + std::to_string(need) +
                                " distinct lambdas below " + std::to_string(options.lambda_max));
  const double lam_max = distinct.back();

  FitResult f;
  f.x = lam;
  f.y = s;
  f.convention = "2^(k S_inf) = A log2(lambda_star / lambda)";
  auto loglog = [](double l, double star) { return std::log2(std::log2(star / l)); };
  auto predict = [&](double l, double k, double a, double star) {
    return (std::log2(a) + loglog(l, star)) / k;
  };

  switch (mode) {
    case DivergenceMode::fixed: {
      if (!(options.lambda_star > lam_max)) throw DomainError("lambda_star must exceed every lambda");
      std::vector<double> a;
      for (std::size_t i = 0; i < lam.size(); ++i) a.push_back(options.k * s[i] - loglog(lam[i], options.lambda_star));
      const MeanSe m = mean_se(a);
      const double amp = std::exp2(m.mean);
      f.model = "saturation_divergence_fixed";
      f.parameters = {{"A", amp, amp * std::numbers::ln2 * m.se * std::sqrt(a.size() / (a.size() - 1.0))},
                      {"k", options.k, 0.0},
                      {"lambda_star", options.lambda_star, 0.0}};
      fill_residuals(f, [&](double l) { return predict(l, options.k, amp, options.lambda_star); });
      break;
    }
    case DivergenceMode::fixed_lambda_star: {
      if (!(options.lambda_star > lam_max)) throw DomainError("lambda_star must exceed every lambda");
      std::vector<double> x;
      for (double l : lam) x.push_back(loglog(l, options.lambda_star));
      const LinearFit lf = linear_fit(x, s);
      const double k = 1.0 / lf.slope;
      const double log2a = lf.intercept * k;
      // d(log2 A)/d(slope) = -intercept/slope^2, d/d(intercept) = 1/slope.
      const double g0 = -lf.intercept / (lf.slope * lf.slope), g1 = 1.0 / lf.slope;
      const double var_log2a = g0 * g0 * lf.slope_se * lf.slope_se + g1 * g1 * lf.intercept_se * lf.intercept_se +
                               2 * g0 * g1 * lf.covariance;
      const double amp = std::exp2(log2a);
      f.model = "saturation_divergence_fixed_lambda_star";
      f.parameters = {{"k", k, lf.slope_se / (lf.slope * lf.slope)},
                      {"A", amp, amp * std::numbers::ln2 * std::sqrt(std::max(0.0, var_log2a))},
                      {"lambda_star", options.lambda_star, 0.0}};
      fill_residuals(f, [&](double l) { return predict(l, k, amp, options.lambda_star); });
      break;
    }
    case DivergenceMode::fixed_k: {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < lam.size(); ++i) {
        x.push_back(std::log2(lam[i]));
        y.push_back(std::exp2(options.k * s[i]));
      }
      const LinearFit lf = linear_fit(x, y);
      const double amp = -lf.slope;
      if (!(amp > 0)) throw DomainError("2^(kS) does not grow as lambda decreases");
      const double log2_star = lf.intercept / amp;
      // log2 lambda_star = -intercept / slope.
      const double g0 = lf.intercept / (lf.slope * lf.slope), g1 = -1.0 / lf.slope;
      const double var = g0 * g0 * lf.slope_se * lf.slope_se + g1 * g1 * lf.intercept_se * lf.intercept_se +
                         2 * g0 * g1 * lf.covariance;
      const double star = std::exp2(log2_star);
      f.model = "saturation_divergence_fixed_k";
      f.parameters = {{"A", amp, lf.slope_se},
                      {"lambda_star", star, star * std::numbers::ln2 * std::sqrt(std::max(0.0, var))},
                      {"k", options.k, 0.0}};
      f.convention += "; fitted as 2^(kS) vs log2 lambda";
      // Residuals in S for comparability across modes.
      fill_residuals(f, [&](double l) {
        const double arg = amp * (log2_star - std::log2(l));
        return arg > 0 ? std::log2(arg) / options.k : kNaN;
      });
      break;
    }
    case DivergenceMode::free: {
      auto inner = [&](double log_star) {
        std::vector<double> x;
        for (double l : lam) x.push_back(loglog(l, std::exp(log_star)));
        return linear_fit(x, s);
      };
      const double lo = std::log(lam_max) + 1e-6;
      const double log_star = scan_minimize([&](double t) { return inner(t).rss; }, lo, std::log(1e4));
      const LinearFit lf = inner(log_star);
      const double star = std::exp(log_star), k = 1.0 / lf.slope, amp = std::exp2(lf.intercept * k);
      const auto model = [](double l, const Eigen::VectorXd& p) {
        return (std::log2(p(1)) + std::log2(std::log2(p(2) / l))) / p(0);
      };
      Eigen::VectorXd p(3);
      p << k, amp, star;
      f.model = "saturation_divergence_free";
      fill_residuals(f, [&](double l) { return model(l, p); });
      const Eigen::MatrixXd cov = nonlinear_covariance(model, p, lam, f.rss);
      f.parameters = {{"k", k, std::sqrt(cov(0, 0))},
                      {"A", amp, std::sqrt(cov(1, 1))},
                      {"lambda_star", star, std::sqrt(cov(2, 2))}};
      break;
    }
  }
  f.range_lo = distinct.front();
  f.range_hi = lam_max;
  return f;
}

}  // namespace tsre
