#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rmtspec/errors.hpp"
#include "rmtspec/esd.hpp"
#include "rmtspec/metrics.hpp"
#include "rmtspec/mp.hpp"
#include "rmtspec/rng.hpp"
#include "rmtspec/synth.hpp"
#include "test_util.hpp"

using namespace rmtspec;

namespace {

MpFit fit_with_edge(double lambda_plus) {
  MpFit f;
  f.lambda_plus = lambda_plus;
  f.converged = true;
  return f;
}

Esd spectrum(std::vector<double> v) {
  const std::size_t m = v.size();
  return Esd::from_values(std::move(v), 4 * m, m);
}

}  // namespace

TEST(MpSoftRank, LeNetFc1Ratio) {
  const Esd esd = spectrum({0.1, 1.0, 3.0, 25.0});
  EXPECT_NEAR(mp_soft_rank(fit_with_edge(3.5), esd), 0.14, 1e-12);
}

TEST(MpSoftRank, NoFitIsZeroAndClampsAtOne) {
  const Esd esd = spectrum({0.5, 1.0, 2.0});
  EXPECT_EQ(mp_soft_rank(std::nullopt, esd), 0.0);
  EXPECT_EQ(mp_soft_rank(fit_with_edge(4.0), esd), 1.0);
  MpFit unconverged = fit_with_edge(1.0);
  unconverged.converged = false;
  EXPECT_EQ(mp_soft_rank(unconverged, esd), 0.0);
  EXPECT_THROW(mp_soft_rank(fit_with_edge(1.0), spectrum({0.0, 0.0})), UndefinedMetricError);
}

TEST(MpSoftRank, PureMpMatrixNearOne) {
  const Esd esd = compute_esd(testutil::gaussian(2000, 500, 12));
  const double r = mp_soft_rank(fit_mp(esd), esd);
  EXPECT_NEAR(r, 1.0, 0.03);
  EXPECT_LE(r, 1.0);
}

TEST(StableRank, ClosedFormCases) {
  EXPECT_DOUBLE_EQ(stable_rank(spectrum({0, 0, 0, 2.5})), 1.0);
  EXPECT_DOUBLE_EQ(stable_rank(spectrum(std::vector<double>(7, 1.3))), 7.0);
  EXPECT_THROW(stable_rank(spectrum({0, 0, 0})), UndefinedMetricError);
}

TEST(StableRank, GaussianMatchesMpPrediction) {
  const double r = stable_rank(compute_esd(testutil::gaussian(1000, 250, 13)));
  EXPECT_NEAR(r, 250.0 / 2.25, 0.05 * 250.0 / 2.25);
}

TEST(SpectralEntropy, ClosedFormCases) {
  EXPECT_NEAR(spectral_entropy(spectrum(std::vector<double>(9, 0.4))), 1.0, 1e-12);
  EXPECT_EQ(spectral_entropy(spectrum({0, 0, 0, 1})), 0.0);
  // Oracle: direct evaluation for a small spectrum.
  const std::vector<double> v = {1, 2, 3, 4};
  double s = 0.0;
  for (double x : v) s -= (x / 10.0) * std::log(x / 10.0);
  EXPECT_NEAR(spectral_entropy(spectrum(v)), s / std::log(4.0), 1e-14);
  EXPECT_THROW(spectral_entropy(spectrum({0, 0})), UndefinedMetricError);
}

TEST(SpectralEntropy, GaussianBaselineDropsWithDominantSpike) {
  SynthSpec spec = default_spec(SynthKind::gaussian, 14);
  spec.n_rows = 1000;
  spec.n_cols = 250;
  const double base = spectral_entropy(compute_esd(generate(spec).matrix));
  EXPECT_GT(base, 0.9);
  EXPECT_LT(base, 1.0);
  spec.kind = SynthKind::spiked;
  spec.spikes = {SpikeSpec{40.0, std::nullopt}};
  EXPECT_LT(spectral_entropy(compute_esd(generate(spec).matrix)), base);
}

TEST(MetricProperties, ScaleInvariance) {
  const Esd esd = compute_esd(testutil::gaussian(120, 40, 15));
  for (double c : {1e-3, 0.5, 20.0}) {
    std::vector<double> scaled = esd.eigenvalues;
    for (double& v : scaled) v *= c * c;
    const Esd s = Esd::from_values(scaled, esd.n_rows, esd.n_cols);
    EXPECT_NEAR(stable_rank(s), stable_rank(esd), 1e-10 * stable_rank(esd));
    EXPECT_NEAR(spectral_entropy(s), spectral_entropy(esd), 1e-12);
  }
}

TEST(MetricProperties, BoundsOnRandomSpectra) {
  Xoshiro256 rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng.below(40);
    std::vector<double> v(m);
    std::size_t nonzero = 0;
    for (double& x : v) {
      x = rng.uniform() < 0.3 ? 0.0 : std::exp(3.0 * rng.normal());
      nonzero += x > 0.0;
    }
    if (nonzero == 0) v[0] = 1.0, nonzero = 1;
    const Esd esd = spectrum(v);
    const double sr = stable_rank(esd);
    EXPECT_GE(sr, 1.0 - 1e-12);
    EXPECT_LE(sr, static_cast<double>(nonzero) + 1e-9);
    const double h = spectral_entropy(esd);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 1.0 + 1e-12);
  }
}

TEST(MetricProperties, MajorizationDecreasesStableRankAndEntropy) {
  std::vector<double> v = {0.5, 1.0, 1.5, 2.0, 3.0};
  double sr = stable_rank(spectrum(v));
  double h = spectral_entropy(spectrum(v));
  for (int step = 0; step < 4; ++step) {
    // Move mass from the smallest nonzero eigenvalue onto the largest.
    auto it = std::find_if(v.begin(), v.end(), [](double x) { return x > 0.0; });
    const double moved = std::min(*it, 0.4);
    *it -= moved;
    v.back() += moved;
    const double sr2 = stable_rank(spectrum(v));
    const double h2 = spectral_entropy(spectrum(v));
    EXPECT_LT(sr2, sr);
    EXPECT_LT(h2, h);
    sr = sr2;
    h = h2;
  }
}

TEST(Ipr, ClosedFormCases) {
  std::vector<double> one_hot(10, 0.0);
  one_hot[3] = 1.0;
  EXPECT_DOUBLE_EQ(ipr(one_hot), 1.0);
  const std::vector<double> flat(16, 0.25);
  EXPECT_DOUBLE_EQ(ipr(flat), 1.0 / 16.0);
  EXPECT_THROW(ipr(std::vector<double>{1.0, 1.0}), PreconditionError);
}

TEST(Ipr, RandomGaussianVectorNearThreeOverM) {
  Xoshiro256 rng(17);
  std::vector<double> v(384);
  double norm = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  for (double& x : v) x /= std::sqrt(norm);
  EXPECT_NEAR(ipr(v), 3.0 / 384.0, 0.3 * 3.0 / 384.0);
}

TEST(Localization, GaussianHasNoSpikesAndDelocalizedBulk) {
  const WeightMatrix w = testutil::gaussian(1200, 300, 18);
  const auto summary = localization_summary(w, fit_mp(compute_esd(w)));
  EXPECT_EQ(summary.spike_count, 0u);
  EXPECT_FALSE(summary.spike_ipr_mean.has_value());
  EXPECT_NEAR(summary.bulk_ipr_mean, 3.0 / 300.0, 0.3 * 3.0 / 300.0);
}

TEST(Localization, SparseSpikeIsMoreLocalized) {
  SynthSpec spec = default_spec(SynthKind::spiked, 19);
  spec.n_rows = 1200;
  spec.n_cols = 300;
  spec.spikes = {SpikeSpec{6.0, std::size_t{10}}};
  const WeightMatrix w = generate(spec).matrix;
  const auto summary = localization_summary(w, fit_mp(compute_esd(w)));
  EXPECT_EQ(summary.spike_count, 1u);
  ASSERT_TRUE(summary.spike_ipr_mean.has_value());
  EXPECT_GT(*summary.spike_ipr_mean, summary.bulk_ipr_mean);
}

TEST(Localization, NoFitMeansNoSpikes) {
  SynthSpec spec = default_spec(SynthKind::rank_collapsed, 20);
  spec.n_rows = 400;
  spec.n_cols = 100;
  const auto summary = localization_summary(generate(spec).matrix, std::nullopt);
  EXPECT_EQ(summary.spike_count, 0u);
  EXPECT_FALSE(summary.spike_ipr_mean.has_value());
}
