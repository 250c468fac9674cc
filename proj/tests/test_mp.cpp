#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rmtspec/errors.hpp"
#include "rmtspec/esd.hpp"
#include "rmtspec/mp.hpp"
#include "rmtspec/synth.hpp"
#include "test_util.hpp"

using namespace rmtspec;

namespace {

// Independent quadrature of the density; tanh-sinh copes with the endpoint
// singularities without a change of variables.
double integrate_density(double a, double b, const MpParams& p) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([&](double x) { return mp_density(x, p); }, a, b);
}

}  // namespace

TEST(MpEdges, ClosedFormCases) {
  auto [lo1, hi1] = mp_edges({1.0, 1.0});
  EXPECT_DOUBLE_EQ(lo1, 0.0);
  EXPECT_DOUBLE_EQ(hi1, 4.0);
  auto [lo4, hi4] = mp_edges({1.0, 4.0});
  EXPECT_DOUBLE_EQ(lo4, 0.25);
  EXPECT_DOUBLE_EQ(hi4, 2.25);
}

TEST(MpEdges, LeNetFc1EdgeNearThreePointFive) {
  const double q = 4.9;
  const double sigma_sq = 3.5 / std::pow(1.0 + 1.0 / std::sqrt(q), 2.0);
  EXPECT_NEAR(sigma_sq, 1.66, 0.005);
  EXPECT_NEAR(mp_edges({1.66, q}).second, 3.5, 0.01);
}

TEST(MpDensity, ValueAtOneForQFour) {
  const double expected = (2.0 / std::numbers::pi) * std::sqrt(0.9375);
  EXPECT_NEAR(mp_density(1.0, {1.0, 4.0}), expected, 1e-14);
  // The quoted four-digit value 0.6162 is a rounding of 0.61640.
  EXPECT_NEAR(expected, 0.6162, 5e-4);
}

TEST(MpDensity, ZeroOutsideSupport) {
  const MpParams p{1.0, 4.0};
  for (double x : {-1.0, 0.0, 0.2, 0.25, 2.25, 2.3, 100.0}) EXPECT_EQ(mp_density(x, p), 0.0) << x;
}

TEST(MpDensity, NormalizesToOne) {
  for (double q : {1.0, 2.0, 4.9}) {
    const MpParams p{1.0, q};
    const auto [lo, hi] = mp_edges(p);
    EXPECT_NEAR(integrate_density(lo, hi, p), 1.0, 1e-6) << "Q=" << q;
  }
}

TEST(MpDensity, VanishesAtEdgesLikeSquareRoot) {
  const MpParams p{1.3, 3.0};
  const auto [lo, hi] = mp_edges(p);
  for (double h : {1e-4, 1e-6, 1e-8}) {
    // ρ(λ+ − h) / √h tends to a finite constant.
    const double ratio_hi = mp_density(hi - h, p) / std::sqrt(h);
    const double ratio_hi2 = mp_density(hi - h / 4, p) / std::sqrt(h / 4);
    EXPECT_NEAR(ratio_hi / ratio_hi2, 1.0, 1e-3);
    EXPECT_LT(mp_density(lo + h, p), 10.0 * std::sqrt(h));
  }
}

TEST(MpCdf, EndpointsAndMonotone) {
  for (double q : {1.0, 2.0, 4.9}) {
    const MpParams p{0.7, q};
    const auto [lo, hi] = mp_edges(p);
    EXPECT_EQ(mp_cdf(lo, p), 0.0);
    EXPECT_EQ(mp_cdf(hi, p), 1.0);
    EXPECT_EQ(mp_cdf(lo - 1.0, p), 0.0);
    EXPECT_EQ(mp_cdf(hi + 1.0, p), 1.0);
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double x = lo + (hi - lo) * i / 1000.0;
      const double c = mp_cdf(x, p);
      EXPECT_GE(c, prev - 1e-12);
      prev = c;
    }
  }
}

TEST(MpCdf, AgreesWithIndependentQuadrature) {
  const MpParams p{1.0, 2.0};
  const auto [lo, hi] = mp_edges(p);
  for (double t : {0.05, 0.3, 0.5, 0.77, 0.99}) {
    const double x = lo + t * (hi - lo);
    EXPECT_NEAR(mp_cdf(x, p), integrate_density(lo, x, p), 1e-8) << x;
  }
}

TEST(MpCdf, SortedEvaluationMatchesPointwise) {
  const MpParams p{1.1, 3.0};
  const Esd esd = compute_esd(testutil::gaussian(600, 200, 4, std::sqrt(1.1)));
  const auto batch = mp_cdf_sorted(esd.eigenvalues, p);
  for (std::size_t i = 0; i < esd.size(); i += 7) EXPECT_NEAR(batch[i], mp_cdf(esd.eigenvalues[i], p), 1e-8);
}

TEST(MpCdf, SquareGaussianMedianMatchesMonteCarlo) {
  // Pooled spectrum of square Gaussian matrices; eigenvalue rigidity makes the
  // pooled median accurate to O(1/M) with a handful of matrices.
  std::vector<Esd> members;
  for (unsigned seed = 0; seed < 4; ++seed) members.push_back(compute_esd(testutil::gaussian(600, 600, 100 + seed)));
  const Esd pooled = pool(members);
  const std::size_t n = pooled.size();
  const double sample_median = 0.5 * (pooled.eigenvalues[n / 2 - 1] + pooled.eigenvalues[n / 2]);
  EXPECT_NEAR(mp_quantile(0.5, {1.0, 1.0}), sample_median, 1e-2);
}

TEST(KsDistance, QuantileConstructionIsSmall) {
  const MpParams p{1.0, 4.0};
  std::vector<double> values;
  for (int i = 1; i <= 99; ++i) values.push_back(mp_quantile(i / 100.0, p));
  EXPECT_LE(ks_distance(values, [&](double x) { return mp_cdf(x, p); }), 0.02);
}

TEST(KsDistance, TrivialCases) {
  const std::vector<double> values = {0.1, 0.4, 0.9};
  EXPECT_DOUBLE_EQ(ks_distance(values, [](double) { return 0.0; }), 1.0);
  const std::vector<double> single = {0.0};
  EXPECT_DOUBLE_EQ(ks_distance(single, [](double x) { return x < 0.0 ? 0.25 : 0.5; }), 0.5);
  EXPECT_DOUBLE_EQ(ks_distance(single, [](double x) { return 0.5 + 0.0 * x; }), 0.5);
}

TEST(KsDistance, MatchesBruteForceTwoSidedDefinition) {
  const std::vector<double> values = {0.05, 0.2, 0.21, 0.6, 0.95};
  const auto cdf = [](double x) { return x * x; };
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, (i + 1.0) / 5.0 - f, f - i / 5.0});
  }
  EXPECT_DOUBLE_EQ(ks_distance(values, cdf), d);
}

TEST(EdgeMargin, FloorAndTracyWidomTerm) {
  EXPECT_DOUBLE_EQ(edge_margin(100000), 0.05);
  EXPECT_NEAR(edge_margin(500), 5.0 * std::pow(500.0, -2.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(edge_margin(100000, 0.1), 0.1);
}

TEST(FitMp, GaussianSeedSeven) {
  SynthSpec spec = default_spec(SynthKind::gaussian, 7);
  const MpFit fit = fit_mp(compute_esd(generate(spec).matrix));
  EXPECT_TRUE(fit.converged);
  EXPECT_GE(fit.params.sigma_sq, 0.97);
  EXPECT_LE(fit.params.sigma_sq, 1.03);
  EXPECT_LT(fit.ks_distance, 0.03);
  EXPECT_LE(fit.n_excluded, 3u);
  EXPECT_EQ(fit.n_bulk + fit.n_excluded, 500u);
  EXPECT_DOUBLE_EQ(fit.params.q, 4.0);
}

TEST(FitMp, TenPlantedSpikesAtTen) {
  SynthSpec spec = default_spec(SynthKind::spiked, 5);
  spec.spikes.assign(10, SpikeSpec{10.0 / 2.25, std::nullopt});
  const Esd esd = compute_esd(generate(spec).matrix);
  const MpFit fit = fit_mp(esd);
  EXPECT_EQ(fit.n_excluded, 10u);
  EXPECT_GE(fit.params.sigma_sq, 0.95);
  EXPECT_LE(fit.params.sigma_sq, 1.05);
  // Ten random rank-one terms are not exactly orthogonal, so the outliers
  // split around 10; their mean stays close to it.
  double top = 0.0;
  for (std::size_t k = 0; k < 10; ++k) top += esd.eigenvalues[esd.size() - 1 - k] / 10.0;
  EXPECT_NEAR(top, 10.0, 0.5);
  EXPECT_GT(esd.eigenvalues[esd.size() - 10], fit.lambda_plus * (1.0 + edge_margin(esd.size())));
}

TEST(FitMp, VeryHeavyTailedHasNoGoodBulk) {
  SynthSpec spec = default_spec(SynthKind::pareto, 1);
  spec.mu = 1.0;
  const Esd esd = compute_esd(generate(spec).matrix);
  try {
    const MpFit fit = fit_mp(esd);
    EXPECT_GT(fit.ks_distance, 0.1);
  } catch (const DegenerateError&) {
    SUCCEED();
  }
}

TEST(FitMp, WeaklyHeavyTailedKeepsMpShape) {
  SynthSpec spec = default_spec(SynthKind::pareto, 2);
  spec.mu = 5.0;
  const MpFit fit = fit_mp(compute_esd(generate(spec).matrix));
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(fit.ks_distance, 0.08);
}

TEST(FitMp, TooFewEigenvalues) {
  const Esd esd = compute_esd(testutil::gaussian(40, 19, 1));
  EXPECT_THROW(fit_mp(esd), InsufficientDataError);
}

TEST(FitMp, ScaleEquivariance) {
  const Esd esd = compute_esd(testutil::gaussian(1000, 250, 21));
  const MpFit base = fit_mp(esd);
  for (double c : {0.1, 3.0}) {
    std::vector<double> scaled = esd.eigenvalues;
    for (double& v : scaled) v *= c * c;
    const MpFit fit = fit_mp(Esd::from_values(scaled, esd.n_rows, esd.n_cols));
    EXPECT_NEAR(fit.params.sigma_sq, c * c * base.params.sigma_sq, 1e-6 * c * c * base.params.sigma_sq);
    EXPECT_EQ(fit.n_excluded, base.n_excluded);
  }
}

TEST(FitMp, SmallGaussianEnsembleMeanWithinTwoPercent) {
  double sum = 0.0;
  for (unsigned seed = 0; seed < 10; ++seed) {
    sum += fit_mp(compute_esd(testutil::gaussian(1000, 250, 300 + seed))).params.sigma_sq;
  }
  EXPECT_NEAR(sum / 10.0, 1.0, 0.02);
}
