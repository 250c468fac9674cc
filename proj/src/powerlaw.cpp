#include "rmtspec/powerlaw.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "rmtspec/errors.hpp"
#include "rmtspec/numeric.hpp"
#include "rmtspec/rng.hpp"

namespace rmtspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> positive_sorted(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    if (v > 0.0 && std::isfinite(v)) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> candidate_grid(const std::vector<double>& pos, const PowerLawOptions& o) {
  std::vector<double> grid;
  if (pos.size() <= o.exhaustive_limit) {
    std::unique_copy(pos.begin(), pos.end(), std::back_inserter(grid));
    return grid;
  }
  const std::size_t k_max = std::max<std::size_t>(o.n_quantiles, 2) - 1;
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double q = o.max_quantile * static_cast<double>(k) / static_cast<double>(k_max);
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(pos.size() - 1)));
    if (grid.empty() || pos[idx] > grid.back()) grid.push_back(pos[idx]);
  }
  return grid;
}

// log erfc(z), stable for large positive z.
double log_erfc(double z) {
  if (z < 25.0) return std::log(std::erfc(z));
  return -z * z - std::log(z * std::sqrt(std::numbers::pi)) + std::log1p(-0.5 / (z * z));
}

struct Tail {
  std::vector<double> y;      // x / x_min, ascending, >= 1
  std::vector<double> log_y;
};

Tail scaled_tail(const std::vector<double>& pos, double x_min) {
  Tail t;
  const auto first = std::lower_bound(pos.begin(), pos.end(), x_min);
  for (auto it = first; it != pos.end(); ++it) {
    t.y.push_back(*it / x_min);
    t.log_y.push_back(std::log(*it / x_min));
  }
  return t;
}

// Per-point log-likelihoods in units of y = x / x_min.
std::vector<double> pl_loglik(const Tail& t, double alpha) {
  std::vector<double> out(t.y.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(alpha - 1.0) - alpha * t.log_y[i];
  return out;
}

struct ModelFit {
  std::vector<double> params;
  std::vector<double> loglik;
  bool ok = false;
};

using PointLogLik = std::function<std::vector<double>(const Tail&, const std::vector<double>&)>;

double mean_nll(const std::vector<double>& ll) {
  double s = 0.0;
  for (double v : ll) {
    if (!std::isfinite(v)) return kInf;
    s -= v;
  }
  return s / static_cast<double>(ll.size());
}

// Minimizes the mean negative log-likelihood from `start` and `restarts`
// jittered copies of it; keeps the best converged optimum.
ModelFit maximize(const Tail& tail, const PointLogLik& loglik, const std::vector<double>& start, int restarts,
                  Xoshiro256& rng) {
  ModelFit best;
  double best_value = kInf;
  for (int r = 0; r <= restarts; ++r) {
    std::vector<double> x0 = start;
    if (r > 0) {
      for (double& v : x0) v += 0.5 * rng.normal();
    }
    const auto result = numeric::nelder_mead([&](const std::vector<double>& p) { return mean_nll(loglik(tail, p)); },
                                             x0, {.initial_step = 0.3, .f_tol = 1e-12, .x_tol = 1e-9, .max_iter = 4000});
    if (result.converged && result.value < best_value) {
      best_value = result.value;
      best.params = result.x;
      best.ok = true;
    }
  }
  if (best.ok) best.loglik = loglik(tail, best.params);
  if (best.ok && !std::isfinite(mean_nll(best.loglik))) best.ok = false;
  return best;
}

std::vector<double> lognormal_loglik(const Tail& t, const std::vector<double>& p) {
  const double mu = p[0];
  const double sigma = std::exp(p[1]);
  // Truncated to y >= 1: P(Y >= 1) = erfc(−μ / (σ√2)) / 2.
  const double log_norm = std::log(0.5) + log_erfc(-mu / (sigma * std::numbers::sqrt2));
  const double c = -std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) - log_norm;
  std::vector<double> out(t.y.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double z = (t.log_y[i] - mu) / sigma;
    out[i] = c - t.log_y[i] - 0.5 * z * z;
  }
  return out;
}

std::vector<double> stretched_exp_loglik(const Tail& t, const std::vector<double>& p) {
  const double lambda = std::exp(p[0]);
  const double beta = std::exp(p[1]);
  std::vector<double> out(t.y.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::log(beta) + std::log(lambda) + (beta - 1.0) * t.log_y[i] - lambda * std::expm1(beta * t.log_y[i]);
  }
  return out;
}

// Z(a, b) = ∫_1^∞ y^(−a) e^(−b y) dy = ∫_0^∞ exp((1 − a)u − b e^u) du.
double tpl_log_norm(double a, double b) {
  boost::math::quadrature::exp_sinh<double> integrator;
  // Factor out the integrand's peak value to avoid overflow for a < 1.
  const double u_peak = a < 1.0 ? std::max(0.0, std::log((1.0 - a) / b)) : 0.0;
  const double peak = (1.0 - a) * u_peak - b * std::exp(u_peak);
  auto f = [&](double u) {
    const double e = (1.0 - a) * u - b * std::exp(u) - peak;
    return e < -745.0 ? 0.0 : std::exp(e);
  };
  double z;
  try {
    z = integrator.integrate(f, 0.0, kInf);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::log(z) + peak;
}

std::vector<double> tpl_loglik(const Tail& t, const std::vector<double>& p) {
  const double a = p[0];
  const double b = std::exp(p[1]);
  const double log_z = tpl_log_norm(a, b);
  std::vector<double> out(t.y.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -a * t.log_y[i] - b * t.y[i] - log_z;
  return out;
}

AlternativeComparison vuong(AltModel model, const std::vector<double>& ll_pl, const ModelFit& alt, double significance) {
  AlternativeComparison c;
  c.model = model;
  if (!alt.ok) {
    c.indeterminate = true;
    return c;
  }
  c.params = alt.params;
  const std::size_t n = ll_pl.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = ll_pl[i] - alt.loglik[i];
  const double total = std::accumulate(diff.begin(), diff.end(), 0.0);
  const double mean = total / static_cast<double>(n);
  double var = 0.0;
  for (double d : diff) var += (d - mean) * (d - mean);
  var /= static_cast<double>(n);
  if (var <= 0.0) {
    c.log_likelihood_ratio = 0.0;
    c.p_value = 1.0;
  } else {
    c.log_likelihood_ratio = total / std::sqrt(static_cast<double>(n) * var);
    c.p_value = std::erfc(std::abs(c.log_likelihood_ratio) / std::numbers::sqrt2);
  }
  c.preferred = c.log_likelihood_ratio < 0.0 && c.p_value <= significance;
  return c;
}

}  // namespace

std::string_view to_string(UniversalityClass c) {
  switch (c) {
    case UniversalityClass::weakly_ht: return "weakly_ht";
    case UniversalityClass::moderately_ht: return "moderately_ht";
    case UniversalityClass::very_ht: return "very_ht";
  }
  return "weakly_ht";
}

std::string_view to_string(AltModel m) {
  switch (m) {
    case AltModel::truncated_pl: return "truncated_pl";
    case AltModel::exponential: return "exponential";
    case AltModel::lognormal: return "lognormal";
    case AltModel::stretched_exponential: return "stretched_exponential";
  }
  return "exponential";
}

UniversalityClass universality_class_from_string(std::string_view text) {
  for (auto c : {UniversalityClass::weakly_ht, UniversalityClass::moderately_ht, UniversalityClass::very_ht}) {
    if (to_string(c) == text) return c;
  }
  throw FormatError("unknown universality class '" + std::string(text) + "'");
}

AltModel alt_model_from_string(std::string_view text) {
  for (auto m : {AltModel::truncated_pl, AltModel::exponential, AltModel::lognormal, AltModel::stretched_exponential}) {
    if (to_string(m) == text) return m;
  }
  throw FormatError("unknown alternative model '" + std::string(text) + "'");
}

Universality classify_universality(double alpha) {
  if (!(alpha > 1.0)) throw PreconditionError("universality class needs alpha > 1");
  const double mu = 2.0 * (alpha - 1.0);
  if (mu <= 2.0) return {mu, UniversalityClass::very_ht};
  if (mu <= 4.0) return {mu, UniversalityClass::moderately_ht};
  return {mu, UniversalityClass::weakly_ht};
}

PlFit fit_power_law(std::span<const double> values, const PowerLawOptions& options) {
  const std::vector<double> pos = positive_sorted(values);
  const std::size_t n_all = pos.size();
  if (n_all < options.n_tail_min) {
    throw InsufficientDataError("power-law fit needs at least " + std::to_string(options.n_tail_min) +
                                " positive values, got " + std::to_string(n_all));
  }
  // Suffix sums of ln x give Σ ln(x_i / x_min) over any tail in O(1).
  std::vector<double> suffix_log(n_all + 1, 0.0);
  for (std::size_t i = n_all; i-- > 0;) suffix_log[i] = suffix_log[i + 1] + std::log(pos[i]);

  PlFit best;
  bool found = false;
  for (double x_min : candidate_grid(pos, options)) {
    const auto start = static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), x_min) - pos.begin());
    const std::size_t n = n_all - start;
    if (n < options.n_tail_min) break;
    const double log_sum = suffix_log[start] - static_cast<double>(n) * std::log(x_min);
    if (!(log_sum > 0.0)) continue;
    const double alpha = 1.0 + static_cast<double>(n) / log_sum;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = 1.0 - std::pow(pos[start + i] / x_min, 1.0 - alpha);
      d = std::max({d, static_cast<double>(i + 1) / static_cast<double>(n) - f,
                    f - static_cast<double>(i) / static_cast<double>(n)});
    }
    if (!found || d < best.ks_distance) {
      best.alpha = alpha;
      best.x_min = x_min;
      best.n_tail = n;
      best.ks_distance = d;
      found = true;
    }
  }
  if (!found) throw DegenerateError("power-law fit: every candidate tail is equal-valued");
  const auto u = classify_universality(best.alpha);
  best.mu = u.mu;
  best.universality_class = u.universality_class;
  return best;
}

PlFit fit_power_law(const Esd& esd, const PowerLawOptions& options) {
  return fit_power_law(std::span<const double>(esd.eigenvalues), options);
}

PlFit compare_alternatives(std::span<const double> values, PlFit fit, const PowerLawOptions& options) {
  const std::vector<double> pos = positive_sorted(values);
  const Tail tail = scaled_tail(pos, fit.x_min);
  if (tail.y.size() < 2) throw InsufficientDataError("alternative comparison needs a tail of at least two values");
  const auto ll_pl = pl_loglik(tail, fit.alpha);
  const double mean_y = std::accumulate(tail.y.begin(), tail.y.end(), 0.0) / static_cast<double>(tail.y.size());
  Xoshiro256 rng(options.seed);

  fit.alternatives.clear();

  // Truncated power law y^(−a) e^(−b y).
  {
    const double b0 = 1.0 / (10.0 * tail.y.back());
    const ModelFit tpl = maximize(tail, tpl_loglik, {fit.alpha, std::log(b0)}, 3, rng);
    fit.alternatives.push_back(vuong(AltModel::truncated_pl, ll_pl, tpl, options.significance));
  }
  // Exponential, closed-form MLE of the rate for a tail shifted to start at 1.
  {
    ModelFit exp_fit;
    if (mean_y > 1.0) {
      const double rate = 1.0 / (mean_y - 1.0);
      exp_fit.params = {rate};
      exp_fit.loglik.resize(tail.y.size());
      for (std::size_t i = 0; i < tail.y.size(); ++i) exp_fit.loglik[i] = std::log(rate) - rate * (tail.y[i] - 1.0);
      exp_fit.ok = true;
    }
    fit.alternatives.push_back(vuong(AltModel::exponential, ll_pl, exp_fit, options.significance));
  }
  // Lognormal truncated to y >= 1.
  {
    double m = 0.0;
    double s2 = 0.0;
    for (double l : tail.log_y) m += l;
    m /= static_cast<double>(tail.log_y.size());
    for (double l : tail.log_y) s2 += (l - m) * (l - m);
    s2 /= static_cast<double>(tail.log_y.size());
    const double log_sd = 0.5 * std::log(std::max(s2, 1e-12));
    const ModelFit ln = maximize(tail, lognormal_loglik, {m, log_sd}, 3, rng);
    fit.alternatives.push_back(vuong(AltModel::lognormal, ll_pl, ln, options.significance));
  }
  // Stretched exponential (Weibull tail).
  {
    const double rate = mean_y > 1.0 ? 1.0 / (mean_y - 1.0) : 1.0;
    const ModelFit se = maximize(tail, stretched_exp_loglik, {std::log(rate), 0.0}, 3, rng);
    fit.alternatives.push_back(vuong(AltModel::stretched_exponential, ll_pl, se, options.significance));
  }
  return fit;
}

PlFit compare_alternatives(const Esd& esd, PlFit fit, const PowerLawOptions& options) {
  return compare_alternatives(std::span<const double>(esd.eigenvalues), std::move(fit), options);
}

bool exponential_preferred(const PlFit& fit) {
  return std::any_of(fit.alternatives.begin(), fit.alternatives.end(), [](const AlternativeComparison& c) {
    return c.model == AltModel::exponential && c.preferred;
  });
}

std::vector<std::string> power_law_warnings(const PlFit& fit) {
  std::vector<std::string> out;
  if (fit.alpha < 1.5 || fit.alpha > 3.5) {
    out.push_back("power-law alpha " + std::to_string(fit.alpha) +
                  " lies outside [1.5, 3.5], where the CSN estimator is reliable");
  }
  if (fit.mu > 2.0 && fit.mu < 4.0) {
    out.push_back("mu in (2, 4): the ESD exponent carries large finite-size corrections; mu = 2(alpha - 1) is the "
                  "infinite-size relation");
  }
  return out;
}

double frechet_scaling_exponent(std::span<const Esd> esds) {
  std::set<std::size_t> sizes;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& e : esds) {
    if (!(e.lambda_max() > 0.0)) throw PreconditionError("Frechet scaling needs lambda_max > 0 for every spectrum");
    sizes.insert(e.n_cols);
    x.push_back(std::log(static_cast<double>(e.n_cols)));
    y.push_back(std::log(e.lambda_max()));
  }
  if (sizes.size() < 3) throw InsufficientDataError("Frechet scaling needs at least three matrix sizes");
  return numeric::ols_slope(x, y);
}

}  // namespace rmtspec
