#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rmtspec/esd.hpp"

namespace rmtspec {

enum class UniversalityClass { weakly_ht, moderately_ht, very_ht };
enum class AltModel { truncated_pl, exponential, lognormal, stretched_exponential };

std::string_view to_string(UniversalityClass c);
std::string_view to_string(AltModel m);
UniversalityClass universality_class_from_string(std::string_view text);
AltModel alt_model_from_string(std::string_view text);

/// Power law against one alternative on the same tail. The ratio is Vuong's
/// normalized statistic: positive favours the power law.
struct AlternativeComparison {
  AltModel model = AltModel::exponential;
  double log_likelihood_ratio = 0.0;
  double p_value = 1.0;
  bool preferred = false;      // ratio < 0 and p <= significance
  bool indeterminate = false;  // the alternative's MLE did not converge
  std::vector<double> params;  // MLE in units of x / x_min

  friend bool operator==(const AlternativeComparison&, const AlternativeComparison&) = default;
};

struct PlFit {
  double alpha = 0.0;
  double x_min = 0.0;
  std::size_t n_tail = 0;
  double ks_distance = 1.0;
  std::vector<AlternativeComparison> alternatives;
  double mu = 0.0;
  UniversalityClass universality_class = UniversalityClass::weakly_ht;

  friend bool operator==(const PlFit&, const PlFit&) = default;
};

struct PowerLawOptions {
  std::size_t n_tail_min = 10;
  std::size_t exhaustive_limit = 1000;  // scan every unique value up to this many
  std::size_t n_quantiles = 100;
  double max_quantile = 0.95;
  double significance = 0.05;
  std::uint64_t seed = 0x5eedULL;  // restarts of the non-convex MLEs
};

/// Continuous power-law fit by the Clauset-Shalizi-Newman procedure: for each
/// candidate x_min, α̂ = 1 + n / Σ ln(x_i / x_min) over the tail, keeping the
/// x_min with the smallest KS distance (ties go to the smaller x_min).
PlFit fit_power_law(std::span<const double> values, const PowerLawOptions& options = {});
PlFit fit_power_law(const Esd& esd, const PowerLawOptions& options = {});

/// Fits truncated power law, exponential, lognormal and stretched exponential
/// by MLE on the tail x >= x_min and runs Vuong's test against the power law.
PlFit compare_alternatives(std::span<const double> values, PlFit fit, const PowerLawOptions& options = {});
PlFit compare_alternatives(const Esd& esd, PlFit fit, const PowerLawOptions& options = {});

struct Universality {
  double mu;
  UniversalityClass universality_class;
};

/// μ = 2(α − 1); very_ht for μ <= 2, moderately_ht for 2 < μ <= 4, else weakly_ht.
Universality classify_universality(double alpha);

/// True when the power law is rejected in favour of the exponential.
bool exponential_preferred(const PlFit& fit);

/// Reliability and finite-size caveats for a fit, for the report.
std::vector<std::string> power_law_warnings(const PlFit& fit);

/// Least-squares slope of ln λ_max against ln M. Needs at least three
/// distinct sizes.
double frechet_scaling_exponent(std::span<const Esd> esds);

}  // namespace rmtspec
