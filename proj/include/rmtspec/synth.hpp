#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmtspec/tensor_io.hpp"

namespace rmtspec {

enum class SynthKind { gaussian, spiked, pareto, bleed, bulk_decay_mix, rank_collapsed };

std::string_view to_string(SynthKind kind);
SynthKind synth_kind_from_string(std::string_view text);

/// One planted low-rank component.
///
/// `strength` is the target location of the planted eigenvalue of (1/N)WᵀW in
/// units of the noise edge λ+ = σ²(1 + 1/√Q)². For strength > 1 the signal
/// eigenvalue s (so that (1/N)ΔᵀΔ has eigenvalue s) solves
///     L/σ² = (1 + t)(1/Q + t)/t,  t = s/σ²,  L = strength·λ+,
/// the large-N outlier location of a rank-one additive perturbation, which puts
/// the observed eigenvalue near L. For strength <= 1 no outlier can land there;
/// the signal is set to strength × (empirical BPP threshold) and a warning is
/// recorded, since such a spike is expected to be absorbed by the bulk.
struct SpikeSpec {
  double strength = 1.0;
  std::optional<std::size_t> sparsity;  // support size of u and v; dense if absent

  friend bool operator==(const SpikeSpec&, const SpikeSpec&) = default;
};

struct SynthSpec {
  SynthKind kind = SynthKind::gaussian;
  std::size_t n_rows = 2000;
  std::size_t n_cols = 500;
  double sigma_sq = 1.0;
  std::optional<double> mu;             // pareto, bulk_decay_mix
  std::vector<SpikeSpec> spikes;        // spiked, bulk_decay_mix
  std::optional<double> zero_fraction;  // rank_collapsed
  std::optional<std::size_t> bleed_rank;     // bleed
  std::optional<double> mix_weight;          // bulk_decay_mix
  std::uint64_t seed = 0;

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

/// Gallery defaults for a kind: 2000 x 500, σ² = 1, and
///   spiked:          10 dense spikes at 4 λ+
///   pareto:          μ = 1.5
///   bleed:           rank 50, strengths uniform in [1.0, 1.2] × BPP threshold
///   bulk_decay_mix:  weight 0.5 on Pareto(μ = 2.5), two spikes at 8 λ+
///   rank_collapsed:  zero_fraction 0.6
SynthSpec default_spec(SynthKind kind, std::uint64_t seed);

/// Throws ParameterError unless each optional field is present exactly when
/// the kind uses it and values are in range.
void validate_spec(const SynthSpec& spec);

struct SynthResult {
  WeightMatrix matrix;
  std::vector<std::string> warnings;
};

/// JSON object with every SynthSpec field; absent optionals are null. The seed
/// is written as an unsigned integer.
std::string spec_to_json(const SynthSpec& spec);
SynthSpec spec_from_json(const std::string& text);

/// Dispatches on spec.kind. Output is a pure function of the spec.
SynthResult generate(const SynthSpec& spec);

/// i.i.d. N(0, σ²) entries, filled row-major in the requested shape.
WeightMatrix gen_gaussian(const SynthSpec& spec);

/// Gaussian noise plus Σ_k √(N s_k) u_k v_kᵀ with random unit u_k, v_k.
SynthResult gen_spiked(const SynthSpec& spec);

/// sign · Pareto(μ, x_m = 1) entries with independent ± signs.
WeightMatrix gen_pareto(const SynthSpec& spec);

/// Gaussian plus a rank-r perturbation whose strengths sit just above the
/// empirical BPP threshold, spreading eigenmass just past λ+.
SynthResult gen_bleed(const SynthSpec& spec);

/// One plausible realization of bulk decay (there is no canonical generative
/// model): the entrywise combination √(1−w)·G + √w·σ·P/√Var(P) of a Gaussian
/// and a variance-normalized Pareto(μ) matrix, plus the listed spikes.
SynthResult gen_bulk_decay_mix(const SynthSpec& spec);

/// Gaussian with ⌈zero_fraction · M⌉ randomly chosen singular values zeroed.
WeightMatrix gen_rank_collapsed(const SynthSpec& spec);

/// Empirical BPP threshold: the rank-one signal eigenvalue s at which a planted
/// spike rises above the 95th percentile of the noise-only λ_max in half of
/// 50 seeded trials. Located by bisection at the generator's Q and σ² with
/// M = min(M, 100), and cached.
double bpp_threshold(std::size_t n_rows, std::size_t n_cols, double sigma_sq);

/// Signal eigenvalue that places a planted outlier at `strength`·λ+ (strength > 1).
double signal_for_outlier(double strength, double q, double sigma_sq);

}  // namespace rmtspec
