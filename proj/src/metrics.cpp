#include "rmtspec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rmtspec/errors.hpp"

namespace rmtspec {

namespace {

double total_mass(const Esd& esd) { return std::accumulate(esd.eigenvalues.begin(), esd.eigenvalues.end(), 0.0); }

}  // namespace

double mp_soft_rank(const std::optional<MpFit>& fit, const Esd& esd) {
  if (esd.eigenvalues.empty()) throw PreconditionError("MP soft rank of an empty spectrum");
  const double lmax = esd.lambda_max();
  if (!(lmax > 0.0)) throw UndefinedMetricError("MP soft rank undefined for a zero matrix");
  if (!fit || !fit->converged) return 0.0;
  return std::min(1.0, fit->lambda_plus / lmax);
}

double stable_rank(const Esd& esd) {
  const double lmax = esd.lambda_max();
  if (!(lmax > 0.0)) throw UndefinedMetricError("stable rank undefined for a zero matrix");
  return total_mass(esd) / lmax;
}

double spectral_entropy(const Esd& esd) {
  const double total = total_mass(esd);
  if (!(total > 0.0)) throw UndefinedMetricError("spectral entropy undefined for a zero matrix");
  if (esd.size() < 2) return 0.0;
  double h = 0.0;
  for (double v : esd.eigenvalues) {
    const double p = v / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::clamp(h / std::log(static_cast<double>(esd.size())), 0.0, 1.0);
}

double ipr(std::span<const double> unit_vector) {
  double norm_sq = 0.0;
  double fourth = 0.0;
  for (double v : unit_vector) {
    const double sq = v * v;
    norm_sq += sq;
    fourth += sq * sq;
  }
  if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-8) throw PreconditionError("IPR needs a unit-norm vector");
  return fourth;
}

LocalizationSummary localization_summary(const WeightMatrix& matrix, const std::optional<MpFit>& fit,
                                         double edge_floor) {
  const SpectralDecomposition sd = decompose(matrix, true);
  const auto m = static_cast<Eigen::Index>(sd.n_cols);
  const double inv_n = 1.0 / static_cast<double>(sd.n_rows);
  const double threshold = fit ? fit->lambda_plus * (1.0 + edge_margin(sd.n_cols, edge_floor))
                               : std::numeric_limits<double>::infinity();

  double bulk_sum = 0.0;
  double spike_sum = 0.0;
  std::size_t n_bulk = 0;
  std::size_t n_spike = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::VectorXd v = sd.right_vectors.col(k).normalized();
    const double value = ipr(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
    const double lambda = sd.singular_values[k] * sd.singular_values[k] * inv_n;
    if (lambda > threshold) {
      spike_sum += value;
      ++n_spike;
    } else {
      bulk_sum += value;
      ++n_bulk;
    }
  }
  LocalizationSummary out;
  out.spike_count = n_spike;
  out.bulk_ipr_mean = n_bulk > 0 ? bulk_sum / static_cast<double>(n_bulk) : 0.0;
  if (n_spike > 0) out.spike_ipr_mean = spike_sum / static_cast<double>(n_spike);
  return out;
}

}  // namespace rmtspec
