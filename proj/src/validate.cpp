#include "rmtspec/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "rmtspec/errors.hpp"
#include "rmtspec/esd.hpp"
#include "rmtspec/mp.hpp"
#include "rmtspec/numeric.hpp"
#include "rmtspec/phases.hpp"
#include "rmtspec/powerlaw.hpp"
#include "rmtspec/report.hpp"
#include "rmtspec/rng.hpp"
#include "rmtspec/synth.hpp"

namespace rmtspec {

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double stddev(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

SuiteCheck within(std::string name, double value, double target, double tol) {
  return {std::move(name), value, "|value - " + fmt(target) + "| <= " + fmt(tol), std::abs(value - target) <= tol};
}

SuiteCheck at_most(std::string name, double value, double limit) {
  return {std::move(name), value, "value <= " + fmt(limit), value <= limit};
}

SuiteCheck below(std::string name, double value, double limit) {
  return {std::move(name), value, "value < " + fmt(limit), value < limit};
}

SuiteCheck at_least(std::string name, double value, double limit) {
  return {std::move(name), value, "value >= " + fmt(limit), value >= limit};
}

SynthSpec gaussian_spec(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  SynthSpec s = default_spec(SynthKind::gaussian, seed);
  s.n_rows = rows;
  s.n_cols = cols;
  return s;
}

void suite_mp(SuiteResult& r) {
  constexpr int kSeeds = 10;
  std::vector<double> sigmas;
  double worst_ks = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < kSeeds; ++i) {
    const Esd esd = compute_esd(gen_gaussian(gaussian_spec(2000, 500, derive_seed(r.seed, 1, i))));
    const MpFit fit = fit_mp(esd);
    sigmas.push_back(fit.params.sigma_sq);
    worst_ks = std::max(worst_ks, fit.ks_distance);
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rel_err = std::abs(mean(sigmas) - 1.0);
  r.statistics["mean_sigma_sq"] = mean(sigmas);
  r.statistics["max_ks_distance"] = worst_ks;
  r.checks.push_back(at_most("relative error of mean fitted sigma^2", rel_err, 0.03));
  r.checks.push_back(at_most("max per-seed KS distance", worst_ks, 0.03));
  r.checks.push_back(below("runtime seconds", elapsed, 30.0));
}

void suite_tw(SuiteResult& r) {
  constexpr int kSeeds = 50;
  const std::vector<std::size_t> sizes = {125, 250, 500, 1000};
  std::vector<double> log_m;
  std::vector<double> log_sd;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::size_t m = sizes[si];
    std::vector<double> maxima;
    for (int i = 0; i < kSeeds; ++i) {
      maxima.push_back(compute_esd(gen_gaussian(gaussian_spec(4 * m, m, derive_seed(r.seed, 10 + si, i)))).lambda_max());
    }
    const double sd = stddev(maxima);
    log_m.push_back(std::log(static_cast<double>(m)));
    log_sd.push_back(std::log(sd));
    r.statistics["mean_lambda_max_M" + std::to_string(m)] = mean(maxima);
    r.statistics["std_lambda_max_M" + std::to_string(m)] = sd;
    if (m == 250) {
      const double lp = mp_edges({1.0, 4.0}).second;
      const double z = std::abs(mean(maxima) - lp) / sd;
      r.checks.push_back(at_most("|mean lambda_max - lambda+| / std at M=250", z, 3.0));
    }
  }
  const double slope = numeric::ols_slope(log_m, log_sd);
  r.statistics["slope"] = slope;
  r.checks.push_back(within("log-log slope of std(lambda_max) vs M", slope, -0.67, 0.15));
}

void suite_frechet(SuiteResult& r) {
  constexpr int kSeeds = 10;
  constexpr double kMu = 1.5;
  const std::vector<std::size_t> sizes = {100, 200, 400, 800};
  std::vector<Esd> esds;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    for (int i = 0; i < kSeeds; ++i) {
      SynthSpec s = default_spec(SynthKind::pareto, derive_seed(r.seed, 20 + si, i));
      s.mu = kMu;
      s.n_rows = 2 * sizes[si];
      s.n_cols = sizes[si];
      esds.push_back(compute_esd(gen_pareto(s)));
    }
  }
  const double slope = frechet_scaling_exponent(esds);
  r.statistics["slope"] = slope;
  r.statistics["expected_slope"] = 4.0 / kMu - 1.0;
  r.checks.push_back(within("slope of ln lambda_max vs ln M", slope, 4.0 / kMu - 1.0, 0.3));
}

void suite_bpp(SuiteResult& r) {
  constexpr int kTrials = 100;
  constexpr std::size_t kSpikes = 3;
  auto detected = [&](double strength, std::uint64_t stream, int i) -> std::size_t {
    SynthSpec s = gaussian_spec(1000, 250, derive_seed(r.seed, stream, i));
    s.kind = SynthKind::spiked;
    s.spikes.assign(kSpikes, SpikeSpec{strength, std::nullopt});
    const Esd esd = compute_esd(gen_spiked(s).matrix);
    try {
      const MpFit fit = fit_mp(esd);
      if (!fit.converged) return 0;
      return spike_statistics(esd, fit).spike_count;
    } catch (const Error&) {
      return 0;
    }
  };
  int exact_above = 0;
  int none_below = 0;
  for (int i = 0; i < kTrials; ++i) {
    if (detected(5.0, 30, i) == kSpikes) ++exact_above;
    if (detected(0.5, 31, i) == 0) ++none_below;
  }
  const double rate_above = static_cast<double>(exact_above) / kTrials;
  const double rate_below = static_cast<double>(none_below) / kTrials;
  r.statistics["planted_spikes"] = kSpikes;
  r.statistics["bpp_threshold_signal"] = bpp_threshold(1000, 250, 1.0);
  r.checks.push_back(at_least("fraction of trials at 5 lambda+ with exact spike count", rate_above, 0.95));
  r.checks.push_back(at_least("fraction of trials at 0.5 lambda+ with no detected spike", rate_below, 0.95));
}

void suite_csn(SuiteResult& r) {
  constexpr int kSeeds = 20;
  constexpr std::size_t kSamples = 10000;
  const std::vector<double> alphas = {1.75, 2.5, 3.5};
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const double alpha = alphas[ai];
    std::vector<double> estimates;
    for (int i = 0; i < kSeeds; ++i) {
      Xoshiro256 rng(derive_seed(r.seed, 40 + ai, i));
      std::vector<double> x(kSamples);
      for (double& v : x) v = std::pow(rng.uniform_pos(), -1.0 / (alpha - 1.0));
      estimates.push_back(fit_power_law(x).alpha);
    }
    const std::string tag = "alpha=" + fmt(alpha);
    r.statistics["mean_alpha_hat_" + fmt(alpha)] = mean(estimates);
    r.statistics["std_alpha_hat_" + fmt(alpha)] = stddev(estimates);
    r.checks.push_back(below("|mean alpha_hat - alpha| at " + tag, std::abs(mean(estimates) - alpha), 0.05));
    r.checks.push_back(below("std alpha_hat at " + tag, stddev(estimates), 0.1));
  }
  int exp_wins = 0;
  for (int i = 0; i < kSeeds; ++i) {
    Xoshiro256 rng(derive_seed(r.seed, 50, i));
    std::vector<double> x(kSamples);
    for (double& v : x) v = -std::log(rng.uniform_pos());
    const PlFit fit = compare_alternatives(x, fit_power_law(x));
    if (exponential_preferred(fit)) ++exp_wins;
  }
  r.checks.push_back(at_least("fraction of exponential samples preferring exponential (p <= 0.05)",
                              static_cast<double>(exp_wins) / kSeeds, 0.9));
}

void suite_gallery(SuiteResult& r) {
  constexpr int kSeeds = 10;
  const std::array<std::pair<SynthKind, Phase>, 6> gallery = {{{SynthKind::gaussian, Phase::random_like},
                                                               {SynthKind::bleed, Phase::bleeding_out},
                                                               {SynthKind::spiked, Phase::bulk_spikes},
                                                               {SynthKind::bulk_decay_mix, Phase::bulk_decay},
                                                               {SynthKind::pareto, Phase::heavy_tailed},
                                                               {SynthKind::rank_collapsed, Phase::rank_collapse}}};
  std::array<std::array<int, 6>, 6> confusion{};
  std::array<double, 6> soft_rank_mean{};
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    const auto [kind, expected] = gallery[g];
    double soft_sum = 0.0;
    for (int i = 0; i < kSeeds; ++i) {
      const SynthResult synth = generate(default_spec(kind, derive_seed(r.seed, 60 + g, i)));
      const PhaseReport rep = analyze_matrix(synth.matrix);
      soft_sum += rep.metrics.mp_soft_rank;
      if (rep.phase) ++confusion[static_cast<std::size_t>(expected)][static_cast<std::size_t>(rep.phase->phase)];
    }
    soft_rank_mean[static_cast<std::size_t>(expected)] = soft_sum / kSeeds;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (std::size_t p = 0; p < 6; ++p) {
    const auto phase = static_cast<Phase>(p);
    const double rate = static_cast<double>(confusion[p][p]) / kSeeds;
    r.checks.push_back(at_least("diagonal rate for " + std::string(to_string(phase)), rate, 0.9));
    r.statistics["mean_mp_soft_rank_" + std::string(to_string(phase))] = soft_rank_mean[p];
  }
  // random_like -> bleeding_out -> bulk_spikes -> bulk_decay -> heavy_tailed
  bool ordered = true;
  for (std::size_t p = 0; p + 1 < 5; ++p) ordered = ordered && soft_rank_mean[p + 1] <= soft_rank_mean[p];
  r.checks.push_back({"mean MP soft rank non-increasing along the phase order", ordered ? 1.0 : 0.0,
                      "random_like >= bleeding_out >= bulk_spikes >= bulk_decay >= heavy_tailed", ordered});
  r.checks.push_back(below("runtime seconds", elapsed, 300.0));
  r.confusion = confusion;
}

}  // namespace

std::string_view to_string(Suite suite) {
  switch (suite) {
    case Suite::mp: return "mp";
    case Suite::tw: return "tw";
    case Suite::frechet: return "frechet";
    case Suite::bpp: return "bpp";
    case Suite::csn: return "csn";
    case Suite::gallery: return "gallery";
  }
  return "mp";
}

Suite suite_from_string(std::string_view text) {
  for (auto s : {Suite::mp, Suite::tw, Suite::frechet, Suite::bpp, Suite::csn, Suite::gallery}) {
    if (to_string(s) == text) return s;
  }
  throw ParameterError("unknown validation suite '" + std::string(text) + "'");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  SplitMix64 sm(base * 0x9e3779b97f4a7c15ULL ^ (stream << 32) ^ index);
  sm.next();
  return sm.next();
}

SuiteResult validate(Suite suite, std::uint64_t seed) {
  SuiteResult r;
  r.suite = suite;
  r.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  switch (suite) {
    case Suite::mp: suite_mp(r); break;
    case Suite::tw: suite_tw(r); break;
    case Suite::frechet: suite_frechet(r); break;
    case Suite::bpp: suite_bpp(r); break;
    case Suite::csn: suite_csn(r); break;
    case Suite::gallery: suite_gallery(r); break;
  }
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = std::all_of(r.checks.begin(), r.checks.end(), [](const SuiteCheck& c) { return c.pass; });
  return r;
}

std::string to_json(const SuiteResult& r) {
  nlohmann::json doc;
  doc["suite"] = std::string(to_string(r.suite));
  doc["seed"] = r.seed;
  doc["pass"] = r.pass;
  doc["runtime_seconds"] = r.runtime_seconds;
  doc["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) {
    doc["checks"].push_back({{"name", c.name}, {"value", c.value}, {"criterion", c.criterion}, {"pass", c.pass}});
  }
  doc["statistics"] = r.statistics;
  if (r.confusion) {
    nlohmann::json rows = nlohmann::json::object();
    for (std::size_t p = 0; p < 6; ++p) {
      nlohmann::json row = nlohmann::json::object();
      for (std::size_t q = 0; q < 6; ++q) row[std::string(to_string(static_cast<Phase>(q)))] = (*r.confusion)[p][q];
      rows[std::string(to_string(static_cast<Phase>(p)))] = row;
    }
    doc["confusion"] = rows;
  }
  return doc.dump(2) + "\n";
}

}  // namespace rmtspec
