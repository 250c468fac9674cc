#include "rmtspec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "rmtspec/errors.hpp"
#include "rmtspec/rng.hpp"

namespace rmtspec {

namespace {

constexpr std::size_t kCalibrationCols = 100;
constexpr int kCalibrationTrials = 50;
constexpr std::uint64_t kCalibrationSeed = 0xb99c0ffeeULL;

std::size_t larger(const SynthSpec& s) { return std::max(s.n_rows, s.n_cols); }
std::size_t smaller(const SynthSpec& s) { return std::min(s.n_rows, s.n_cols); }

// Oriented N x M Gaussian block; filled row-major in the *requested* shape so
// that gen_gaussian and the spiked generators share a noise stream.
Eigen::MatrixXd gaussian_oriented(const SynthSpec& spec, Xoshiro256& rng) {
  const double sd = std::sqrt(spec.sigma_sq);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(spec.n_rows), static_cast<Eigen::Index>(spec.n_cols));
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = sd * rng.normal();
  }
  if (g.rows() < g.cols()) g.transposeInPlace();
  return g;
}

Eigen::VectorXd random_unit(Eigen::Index n, std::optional<std::size_t> sparsity, Xoshiro256& rng) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  if (!sparsity || *sparsity >= static_cast<std::size_t>(n)) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  } else {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (std::size_t k = 0; k < *sparsity; ++k) {
      const auto j = k + static_cast<std::size_t>(rng.below(idx.size() - k));
      std::swap(idx[k], idx[j]);
      v[idx[k]] = rng.normal();
    }
  }
  const double norm = v.norm();
  if (norm == 0.0) v[0] = 1.0;
  else v /= norm;
  return v;
}

WeightMatrix finish(const SynthSpec& spec, Eigen::MatrixXd oriented) {
  if (spec.n_rows < spec.n_cols) oriented.transposeInPlace();
  return WeightMatrix::from_eigen(std::string(to_string(spec.kind)) + "_seed" + std::to_string(spec.seed), oriented);
}

void plant(Eigen::MatrixXd& w, double signal, std::optional<std::size_t> sparsity, Xoshiro256& rng) {
  const Eigen::VectorXd u = random_unit(w.rows(), sparsity, rng);
  const Eigen::VectorXd v = random_unit(w.cols(), sparsity, rng);
  w.noalias() += std::sqrt(static_cast<double>(w.rows()) * signal) * u * v.transpose();
}

// Plants each spike; returns the warnings produced.
std::vector<std::string> plant_spikes(const SynthSpec& spec, Eigen::MatrixXd& w, Xoshiro256& rng) {
  std::vector<std::string> warnings;
  const double q = static_cast<double>(larger(spec)) / static_cast<double>(smaller(spec));
  for (const auto& spike : spec.spikes) {
    double signal;
    if (spike.strength > 1.0) {
      signal = signal_for_outlier(spike.strength, q, spec.sigma_sq);
    } else {
      signal = spike.strength * bpp_threshold(spec.n_rows, spec.n_cols, spec.sigma_sq);
      warnings.push_back("spike strength " + std::to_string(spike.strength) +
                         " is below the bulk edge; sub-BPP spike expected to be absorbed");
    }
    plant(w, signal, spike.sparsity, rng);
  }
  return warnings;
}

}  // namespace

std::string_view to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::gaussian: return "gaussian";
    case SynthKind::spiked: return "spiked";
    case SynthKind::pareto: return "pareto";
    case SynthKind::bleed: return "bleed";
    case SynthKind::bulk_decay_mix: return "bulk_decay_mix";
    case SynthKind::rank_collapsed: return "rank_collapsed";
  }
  return "gaussian";
}

SynthKind synth_kind_from_string(std::string_view text) {
  for (auto k : {SynthKind::gaussian, SynthKind::spiked, SynthKind::pareto, SynthKind::bleed,
                 SynthKind::bulk_decay_mix, SynthKind::rank_collapsed}) {
    if (to_string(k) == text) return k;
  }
  throw ParameterError("unknown synth kind '" + std::string(text) + "'");
}

SynthSpec default_spec(SynthKind kind, std::uint64_t seed) {
  SynthSpec s;
  s.kind = kind;
  s.seed = seed;
  switch (kind) {
    case SynthKind::gaussian: break;
    case SynthKind::spiked: s.spikes.assign(10, SpikeSpec{4.0, std::nullopt}); break;
    case SynthKind::pareto: s.mu = 1.5; break;
    case SynthKind::bleed: s.bleed_rank = 50; break;
    case SynthKind::bulk_decay_mix:
      s.mu = 2.5;
      s.mix_weight = 0.5;
      s.spikes.assign(2, SpikeSpec{8.0, std::nullopt});
      break;
    case SynthKind::rank_collapsed: s.zero_fraction = 0.6; break;
  }
  return s;
}

void validate_spec(const SynthSpec& s) {
  const auto require = [&](bool present, bool needed, const char* field) {
    if (present != needed) {
      throw ParameterError(std::string(field) + (needed ? " is required" : " is not used") + " for kind " +
                           std::string(to_string(s.kind)));
    }
  };
  if (s.n_rows < 2 || s.n_cols < 2) throw ParameterError("synthetic matrices must be at least 2x2");
  if (!(s.sigma_sq > 0.0)) throw ParameterError("sigma_sq must be positive");
  const bool uses_mu = s.kind == SynthKind::pareto || s.kind == SynthKind::bulk_decay_mix;
  const bool uses_spikes = s.kind == SynthKind::spiked || s.kind == SynthKind::bulk_decay_mix;
  require(s.mu.has_value(), uses_mu, "mu");
  require(!s.spikes.empty(), uses_spikes, "spikes");
  require(s.zero_fraction.has_value(), s.kind == SynthKind::rank_collapsed, "zero_fraction");
  require(s.bleed_rank.has_value(), s.kind == SynthKind::bleed, "bleed_rank");
  require(s.mix_weight.has_value(), s.kind == SynthKind::bulk_decay_mix, "mix_weight");
  if (s.mu && !(*s.mu > 0.0)) throw ParameterError("mu must be positive");
  if (s.zero_fraction && !(*s.zero_fraction >= 0.0 && *s.zero_fraction <= 1.0)) {
    throw ParameterError("zero_fraction must lie in [0, 1]");
  }
  if (s.mix_weight && !(*s.mix_weight >= 0.0 && *s.mix_weight <= 1.0)) {
    throw ParameterError("mix_weight must lie in [0, 1]");
  }
  if (s.bleed_rank && (*s.bleed_rank == 0 || *s.bleed_rank > smaller(s))) {
    throw ParameterError("bleed_rank must lie in [1, min(rows, cols)]");
  }
  for (const auto& spike : s.spikes) {
    if (!(spike.strength > 0.0)) throw ParameterError("spike strength must be positive");
    if (spike.sparsity && *spike.sparsity == 0) throw ParameterError("spike sparsity must be positive");
  }
}

double signal_for_outlier(double strength, double q, double sigma_sq) {
  if (!(strength > 1.0)) throw ParameterError("outlier placement needs strength > 1");
  const double c = 1.0 / q;
  const double r = 1.0 + std::sqrt(c);
  const double level = strength * r * r;  // L / σ²
  const double b = level - 1.0 - c;
  const double t = 0.5 * (b + std::sqrt(b * b - 4.0 * c));
  return t * sigma_sq;
}

double bpp_threshold(std::size_t n_rows, std::size_t n_cols, double sigma_sq) {
  const std::size_t n_big = std::max(n_rows, n_cols);
  const std::size_t n_small = std::min(n_rows, n_cols);
  const double q = static_cast<double>(n_big) / static_cast<double>(n_small);
  const std::size_t m = std::min(n_small, kCalibrationCols);
  const auto n = static_cast<std::size_t>(std::llround(q * static_cast<double>(m)));

  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, double>, double> cache;
  const auto key = std::make_tuple(n, m, sigma_sq);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  // Common random numbers across the bisection: each trial keeps its noise
  // and spike directions, so detection is monotone in the signal.
  struct Trial {
    Eigen::MatrixXd gram;      // GᵀG / N
    Eigen::VectorXd cross;     // Gᵀu / √N
    Eigen::VectorXd v;
  };
  std::vector<Trial> trials;
  std::vector<double> noise_max;
  const auto ni = static_cast<Eigen::Index>(n);
  const auto mi = static_cast<Eigen::Index>(m);
  for (int t = 0; t < kCalibrationTrials; ++t) {
    Xoshiro256 rng(kCalibrationSeed + static_cast<std::uint64_t>(t));
    Eigen::MatrixXd g(ni, mi);
    const double sd = std::sqrt(sigma_sq);
    for (Eigen::Index r = 0; r < ni; ++r) {
      for (Eigen::Index c = 0; c < mi; ++c) g(r, c) = sd * rng.normal();
    }
    const Eigen::VectorXd u = random_unit(ni, std::nullopt, rng);
    Trial trial;
    trial.v = random_unit(mi, std::nullopt, rng);
    trial.gram = g.transpose() * g / static_cast<double>(n);
    trial.cross = g.transpose() * u / std::sqrt(static_cast<double>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(trial.gram, Eigen::EigenvaluesOnly);
    noise_max.push_back(es.eigenvalues()(mi - 1));
    trials.push_back(std::move(trial));
  }
  std::sort(noise_max.begin(), noise_max.end());
  const double noise_q95 = noise_max[static_cast<std::size_t>(0.95 * (kCalibrationTrials - 1) + 0.5)];

  // (1/N)(G + √(N s) u vᵀ)ᵀ(...) = GᵀG/N + √s (Gᵀu/√N vᵀ + v (Gᵀu/√N)ᵀ) + s v vᵀ
  auto detection_rate = [&](double s) {
    int hits = 0;
    for (const auto& tr : trials) {
      Eigen::MatrixXd x = tr.gram;
      x.noalias() += std::sqrt(s) * (tr.cross * tr.v.transpose() + tr.v * tr.cross.transpose());
      x.noalias() += s * tr.v * tr.v.transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x, Eigen::EigenvaluesOnly);
      if (es.eigenvalues()(mi - 1) > noise_q95) ++hits;
    }
    return static_cast<double>(hits) / kCalibrationTrials;
  };

  double lo = 0.0;
  double hi = sigma_sq / std::sqrt(q);
  while (detection_rate(hi) < 0.5) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 30 && hi - lo > 1e-4 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detection_rate(mid) >= 0.5 ? hi : lo) = mid;
  }
  const double threshold = 0.5 * (lo + hi);
  std::lock_guard lock(mutex);
  cache.emplace(key, threshold);
  return threshold;
}

WeightMatrix gen_gaussian(const SynthSpec& spec) {
  Xoshiro256 rng(spec.seed);
  return finish(spec, gaussian_oriented(spec, rng));
}

SynthResult gen_spiked(const SynthSpec& spec) {
  Xoshiro256 rng(spec.seed);
  Eigen::MatrixXd w = gaussian_oriented(spec, rng);
  auto warnings = plant_spikes(spec, w, rng);
  return {finish(spec, std::move(w)), std::move(warnings)};
}

namespace {

Eigen::MatrixXd pareto_oriented(const SynthSpec& spec, double mu, Xoshiro256& rng) {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(spec.n_rows), static_cast<Eigen::Index>(spec.n_cols));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      const double magnitude = std::pow(rng.uniform_pos(), -1.0 / mu);
      p(r, c) = rng.sign() * magnitude;
    }
  }
  if (p.rows() < p.cols()) p.transposeInPlace();
  return p;
}

}  // namespace

WeightMatrix gen_pareto(const SynthSpec& spec) {
  if (!spec.mu || !(*spec.mu > 0.0)) throw ParameterError("pareto generator needs mu > 0");
  Xoshiro256 rng(spec.seed);
  return finish(spec, pareto_oriented(spec, *spec.mu, rng));
}

SynthResult gen_bleed(const SynthSpec& spec) {
  const std::size_t rank = spec.bleed_rank.value_or(50);
  Xoshiro256 rng(spec.seed);
  Eigen::MatrixXd w = gaussian_oriented(spec, rng);
  const double threshold = bpp_threshold(spec.n_rows, spec.n_cols, spec.sigma_sq);
  for (std::size_t k = 0; k < rank; ++k) {
    const double signal = threshold * (1.0 + 0.2 * rng.uniform());
    plant(w, signal, std::nullopt, rng);
  }
  return {finish(spec, std::move(w)), {}};
}

SynthResult gen_bulk_decay_mix(const SynthSpec& spec) {
  const double mu = spec.mu.value_or(2.5);
  const double weight = spec.mix_weight.value_or(0.5);
  if (!(mu > 2.0)) throw ParameterError("bulk_decay_mix needs mu > 2 so the Pareto part has finite variance");
  Xoshiro256 rng(spec.seed);
  Eigen::MatrixXd g = gaussian_oriented(spec, rng);
  const Eigen::MatrixXd p = pareto_oriented(spec, mu, rng);
  const double p_scale = std::sqrt(spec.sigma_sq * (mu - 2.0) / mu);  // Var = μ/(μ−2) for x_m = 1
  Eigen::MatrixXd w = std::sqrt(1.0 - weight) * g + std::sqrt(weight) * p_scale * p;
  auto warnings = plant_spikes(spec, w, rng);
  return {finish(spec, std::move(w)), std::move(warnings)};
}

WeightMatrix gen_rank_collapsed(const SynthSpec& spec) {
  const double fraction = spec.zero_fraction.value_or(-1.0);
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ParameterError("zero_fraction must lie in [0, 1]");
  Xoshiro256 rng(spec.seed);
  const Eigen::MatrixXd g = gaussian_oriented(spec, rng);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  const auto m = static_cast<std::size_t>(s.size());
  const auto zeros = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m) - 1e-9));
  std::vector<Eigen::Index> idx(m);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (std::size_t k = 0; k < zeros; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.below(m - k));
    std::swap(idx[k], idx[j]);
    s[idx[k]] = 0.0;
  }
  Eigen::MatrixXd w = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  return finish(spec, std::move(w));
}

std::string spec_to_json(const SynthSpec& s) {
  using nlohmann::json;
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  json spikes = json::array();
  for (const auto& sp : s.spikes) spikes.push_back({{"strength", sp.strength}, {"sparsity", opt(sp.sparsity)}});
  const json doc = {{"kind", std::string(to_string(s.kind))},
                    {"n_rows", s.n_rows},
                    {"n_cols", s.n_cols},
                    {"sigma_sq", s.sigma_sq},
                    {"mu", opt(s.mu)},
                    {"spikes", spikes},
                    {"zero_fraction", opt(s.zero_fraction)},
                    {"bleed_rank", opt(s.bleed_rank)},
                    {"mix_weight", opt(s.mix_weight)},
                    {"seed", s.seed}};
  return doc.dump(2) + "\n";
}

SynthSpec spec_from_json(const std::string& text) {
  using nlohmann::json;
  try {
    const json doc = json::parse(text);
    auto opt = [&]<typename T>(const char* key, std::optional<T>& out) {
      if (doc.contains(key) && !doc.at(key).is_null()) out = doc.at(key).get<T>();
    };
    SynthSpec s;
    s.kind = synth_kind_from_string(doc.at("kind").get<std::string>());
    s.n_rows = doc.at("n_rows").get<std::size_t>();
    s.n_cols = doc.at("n_cols").get<std::size_t>();
    s.sigma_sq = doc.at("sigma_sq").get<double>();
    opt("mu", s.mu);
    opt("zero_fraction", s.zero_fraction);
    opt("bleed_rank", s.bleed_rank);
    opt("mix_weight", s.mix_weight);
    for (const auto& sp : doc.value("spikes", json::array())) {
      SpikeSpec spike{sp.at("strength").get<double>(), std::nullopt};
      if (sp.contains("sparsity") && !sp.at("sparsity").is_null()) spike.sparsity = sp.at("sparsity").get<std::size_t>();
      s.spikes.push_back(spike);
    }
    s.seed = doc.at("seed").get<std::uint64_t>();
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed synth spec: ") + e.what());
  }
}

SynthResult generate(const SynthSpec& spec) {
  validate_spec(spec);
  switch (spec.kind) {
    case SynthKind::gaussian: return {gen_gaussian(spec), {}};
    case SynthKind::spiked: return gen_spiked(spec);
    case SynthKind::pareto: return {gen_pareto(spec), {}};
    case SynthKind::bleed: return gen_bleed(spec);
    case SynthKind::bulk_decay_mix: return gen_bulk_decay_mix(spec);
    case SynthKind::rank_collapsed: return {gen_rank_collapsed(spec), {}};
  }
  throw ParameterError("unknown synth kind");
}

}  // namespace rmtspec
