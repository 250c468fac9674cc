#include "rmtspec/mp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rmtspec/errors.hpp"
#include "rmtspec/numeric.hpp"

namespace rmtspec {

namespace {

constexpr double kCdfTol = 1e-9;

void check_params(const MpParams& p) {
  if (!(p.sigma_sq > 0.0) || !(p.q >= 1.0)) throw PreconditionError("MP parameters need sigma_sq > 0 and Q >= 1");
}

// Substituting x = λ− + w sin²θ, w = λ+ − λ−, turns ρ(x) dx into a smooth
// integrand in θ ∈ [0, π/2].
struct AngleIntegrand {
  double lm;
  double width;
  double scale;  // Q / (2πσ²)

  double operator()(double theta) const {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double x = lm + width * s * s;
    if (x <= 0.0) {
      // λ− = 0 (Q = 1) at θ = 0: the ratio sin²θ / x tends to 1 / w.
      return scale * 2.0 * width * c * c;
    }
    return scale * 2.0 * width * width * s * s * c * c / x;
  }

  double angle(double x) const {
    const double t = std::clamp((x - lm) / width, 0.0, 1.0);
    return std::asin(std::sqrt(t));
  }
};

AngleIntegrand make_integrand(const MpParams& p) {
  const auto [lm, lp] = mp_edges(p);
  return {lm, lp - lm, p.q / (2.0 * std::numbers::pi * p.sigma_sq)};
}

double median(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace

double edge_margin(std::size_t m, double floor) {
  return std::max(floor, 5.0 * std::pow(static_cast<double>(m), -2.0 / 3.0));
}

std::pair<double, double> mp_edges(const MpParams& params) {
  check_params(params);
  const double r = 1.0 / std::sqrt(params.q);
  return {params.sigma_sq * (1.0 - r) * (1.0 - r), params.sigma_sq * (1.0 + r) * (1.0 + r)};
}

double mp_density(double x, const MpParams& params) {
  const auto [lm, lp] = mp_edges(params);
  if (!(x > lm) || !(x < lp) || !(x > 0.0)) return 0.0;
  return params.q / (2.0 * std::numbers::pi * params.sigma_sq) * std::sqrt((lp - x) * (x - lm)) / x;
}

double mp_cdf(double x, const MpParams& params) {
  const auto [lm, lp] = mp_edges(params);
  if (x <= lm) return 0.0;
  if (x >= lp) return 1.0;
  const AngleIntegrand g = make_integrand(params);
  const double value = numeric::adaptive_simpson(g, 0.0, g.angle(x), kCdfTol);
  return std::clamp(value, 0.0, 1.0);
}

std::vector<double> mp_cdf_sorted(std::span<const double> sorted_x, const MpParams& params) {
  const auto [lm, lp] = mp_edges(params);
  const AngleIntegrand g = make_integrand(params);
  std::vector<double> out(sorted_x.size());
  double theta_prev = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < sorted_x.size(); ++i) {
    const double x = sorted_x[i];
    if (x <= lm) {
      out[i] = 0.0;
      continue;
    }
    if (x >= lp) {
      out[i] = 1.0;
      continue;
    }
    const double theta = g.angle(x);
    if (theta > theta_prev) {
      acc += numeric::adaptive_simpson(g, theta_prev, theta, kCdfTol / 16);
      theta_prev = theta;
    }
    out[i] = std::clamp(acc, 0.0, 1.0);
  }
  return out;
}

double mp_quantile(double p, const MpParams& params) {
  auto [lo, hi] = mp_edges(params);
  if (p <= 0.0) return lo;
  if (p >= 1.0) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mp_cdf(mid, params) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ks_distance_precomputed(std::span<const double> model_cdf_at_samples) {
  const auto n = static_cast<double>(model_cdf_at_samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < model_cdf_at_samples.size(); ++i) {
    const double f = model_cdf_at_samples[i];
    const double upper = static_cast<double>(i + 1) / n - f;
    const double lower = f - static_cast<double>(i) / n;
    d = std::max({d, upper, lower});
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks_distance(std::span<const double> sorted_values, const std::function<double(double)>& cdf) {
  if (sorted_values.empty()) throw PreconditionError("KS distance of an empty sample");
  std::vector<double> model(sorted_values.size());
  std::transform(sorted_values.begin(), sorted_values.end(), model.begin(), cdf);
  return ks_distance_precomputed(model);
}

MpFit fit_mp(const Esd& esd, const MpFitOptions& options) {
  const std::span<const double> values(esd.eigenvalues);
  const std::size_t m = values.size();
  if (m < options.min_bulk) {
    throw InsufficientDataError("MP fit of '" + esd.source_name + "' needs at least " +
                                std::to_string(options.min_bulk) + " eigenvalues, got " + std::to_string(m));
  }
  const double q = std::max(esd.q, 1.0);
  const double delta = edge_margin(m, options.edge_floor);

  const double unit_median = mp_quantile(0.5, {1.0, q});
  const double sigma0 = median(values) / unit_median;
  if (!(sigma0 > 0.0)) throw DegenerateError("MP fit of '" + esd.source_name + "': median eigenvalue is zero");

  auto ks_for = [&](std::span<const double> bulk, double sigma_sq) {
    return ks_distance_precomputed(mp_cdf_sorted(bulk, {sigma_sq, q}));
  };
  auto retained_count = [&](double sigma_sq) {
    const double cutoff = mp_edges({sigma_sq, q}).second * (1.0 + delta);
    return static_cast<std::size_t>(std::upper_bound(values.begin(), values.end(), cutoff) - values.begin());
  };

  double sigma_sq = sigma0;
  std::size_t n_ret = retained_count(sigma_sq);
  bool converged = false;
  int iterations = 0;
  while (iterations < options.max_iterations) {
    if (n_ret < options.min_bulk) {
      throw DegenerateError("MP fit of '" + esd.source_name + "': retained bulk shrank to " + std::to_string(n_ret));
    }
    const auto bulk = values.first(n_ret);
    sigma_sq = numeric::golden_section([&](double s) { return ks_for(bulk, s); }, 0.2 * sigma0, 2.0 * sigma0,
                                       1e-10 * sigma0)
                   .x;
    ++iterations;
    const std::size_t next = retained_count(sigma_sq);
    if (next == n_ret) {
      converged = true;
      break;
    }
    n_ret = next;
  }
  if (n_ret < options.min_bulk) {
    throw DegenerateError("MP fit of '" + esd.source_name + "': retained bulk shrank to " + std::to_string(n_ret));
  }
  if (static_cast<double>(m - n_ret) > options.max_excluded_fraction * static_cast<double>(m)) {
    throw DegenerateError("MP fit of '" + esd.source_name + "': " + std::to_string(m - n_ret) + " of " +
                          std::to_string(m) + " eigenvalues lie above the fitted edge; no MP bulk");
  }

  MpFit fit;
  fit.params = {sigma_sq, q};
  std::tie(fit.lambda_minus, fit.lambda_plus) = mp_edges(fit.params);
  fit.ks_distance = ks_for(values.first(n_ret), sigma_sq);
  fit.n_bulk = n_ret;
  fit.n_excluded = m - n_ret;
  fit.converged = converged;
  fit.iterations = iterations;
  return fit;
}

}  // namespace rmtspec
