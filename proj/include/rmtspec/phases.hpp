#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmtspec/esd.hpp"
#include "rmtspec/mp.hpp"
#include "rmtspec/powerlaw.hpp"

namespace rmtspec {

/// The 5+1 phases, in order of increasing implicit self-regularization
/// (rank_collapse last).
enum class Phase { random_like, bleeding_out, bulk_spikes, bulk_decay, heavy_tailed, rank_collapse };

std::string_view to_string(Phase phase);
Phase phase_from_string(std::string_view text);

struct PhaseLabel {
  Phase phase = Phase::random_like;
  std::vector<std::string> rationale;

  friend bool operator==(const PhaseLabel&, const PhaseLabel&) = default;
};

struct PhaseEvidence {
  std::optional<MpFit> mp_fit;
  std::optional<PlFit> pl_fit;
  double zero_mass_fraction = 0.0;
  double bleed_mass_fraction = 0.0;
  std::size_t spike_count = 0;
  double spike_gap = 0.0;
};

struct PhaseThresholds {
  double zero_mass = 0.25;   // f₀
  double alpha_ht = 4.0;
  double mp_ks = 0.05;       // τ_mp
  double bleed_mass = 0.01;  // β
  double spike_gap = 0.25;   // g
  double edge_floor = 0.05;  // floor of δ_edge
};

struct SpikeStatistics {
  std::size_t spike_count = 0;
  double spike_gap = 0.0;
  double bleed_mass_fraction = 0.0;
  double zero_mass_fraction = 0.0;
};

/// Fraction of eigenvalues below 1e-9 · λ_max.
double zero_mass_fraction(const Esd& esd);

/// Counts eigenvalues above t = λ+(1 + δ_edge), the bleed mass in (λ+, t], and
/// the gap (smallest spike − largest non-spike) / λ+.
SpikeStatistics spike_statistics(const Esd& esd, const MpFit& fit, double edge_floor = 0.05);

/// Assembles evidence; spike terms are zero unless the MP fit converged.
PhaseEvidence gather_evidence(const Esd& esd, std::optional<MpFit> mp_fit, std::optional<PlFit> pl_fit,
                              double edge_floor = 0.05);

/// First matching rule wins: rank_collapse, heavy_tailed, random_like,
/// bulk_spikes, bleeding_out, then bulk_decay as the residual class.
PhaseLabel classify(const PhaseEvidence& evidence, const PhaseThresholds& thresholds = {});

}  // namespace rmtspec
