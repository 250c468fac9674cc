#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "rmtspec/esd.hpp"
#include "rmtspec/mp.hpp"
#include "rmtspec/tensor_io.hpp"

namespace rmtspec {

struct LayerMetrics {
  double mp_soft_rank = 0.0;
  double stable_rank = 0.0;
  double entropy = 0.0;
  double lambda_max = 0.0;
  std::size_t spike_count = 0;
  double bulk_ipr_mean = 0.0;
  std::optional<double> spike_ipr_mean;  // absent when spike_count == 0

  friend bool operator==(const LayerMetrics&, const LayerMetrics&) = default;
};

/// λ+ / λ_max, clamped to 1; 0 without a converged MP fit.
double mp_soft_rank(const std::optional<MpFit>& fit, const Esd& esd);

/// Σλ / λ_max = ‖W‖²_F / ‖W‖²₂.
double stable_rank(const Esd& esd);

/// Shannon entropy of p_i = λ_i / Σλ, divided by ln M.
double spectral_entropy(const Esd& esd);

/// Inverse participation ratio Σ v_i⁴ of a unit vector.
double ipr(std::span<const double> unit_vector);

struct LocalizationSummary {
  double bulk_ipr_mean = 0.0;
  std::optional<double> spike_ipr_mean;
  std::size_t spike_count = 0;
};

/// Mean IPR of the right singular vectors of the N >= M oriented matrix, split
/// at the spike threshold λ+(1 + δ_edge) of the fit. No fit means no spikes.
LocalizationSummary localization_summary(const WeightMatrix& matrix, const std::optional<MpFit>& fit,
                                         double edge_floor = 0.05);

}  // namespace rmtspec
