#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "rmtspec/esd.hpp"

namespace rmtspec {

/// Marchenko-Pastur law parameters: element variance and aspect ratio N/M.
struct MpParams {
  double sigma_sq = 1.0;
  double q = 1.0;

  friend bool operator==(const MpParams&, const MpParams&) = default;
};

struct MpFit {
  MpParams params;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double ks_distance = 1.0;  // on the retained bulk
  std::size_t n_bulk = 0;
  std::size_t n_excluded = 0;
  bool converged = false;
  int iterations = 0;

  friend bool operator==(const MpFit&, const MpFit&) = default;
};

struct MpFitOptions {
  double edge_floor = 0.05;  // lower bound on the spike-exclusion margin
  int max_iterations = 20;
  std::size_t min_bulk = 20;
  double max_excluded_fraction = 0.5;  // more excluded than this: no bulk to speak of
};

/// Relative margin above λ+ inside which eigenvalues still count as bulk:
/// max(floor, 5 M^(-2/3)), tracking the Tracy-Widom edge scale.
double edge_margin(std::size_t m, double floor = 0.05);

/// λ± = σ²(1 ± 1/√Q)².
std::pair<double, double> mp_edges(const MpParams& params);

double mp_density(double x, const MpParams& params);

/// ∫ ρ from λ− to x by adaptive Simpson (abs. tol 1e-9) in an angle
/// variable that removes the square-root edge singularities.
double mp_cdf(double x, const MpParams& params);

/// CDF at every point of an ascending array; one pass of segment integrals.
std::vector<double> mp_cdf_sorted(std::span<const double> sorted_x, const MpParams& params);

/// x with mp_cdf(x) = p, by bisection.
double mp_quantile(double p, const MpParams& params);

/// Two-sided KS distance between the empirical CDF of `sorted_values` and `cdf`.
double ks_distance(std::span<const double> sorted_values, const std::function<double(double)>& cdf);

/// Same statistic with the model CDF already evaluated at each sample point.
double ks_distance_precomputed(std::span<const double> model_cdf_at_samples);

/// Fits an MP bulk with Q fixed from the shape: median-matched start, then
/// alternating spike exclusion and KS-minimizing golden-section refits of σ².
/// Throws InsufficientDataError when M < min_bulk and DegenerateError when
/// the retained bulk shrinks below min_bulk or below (1 − max_excluded_fraction)·M.
MpFit fit_mp(const Esd& esd, const MpFitOptions& options = {});

}  // namespace rmtspec
