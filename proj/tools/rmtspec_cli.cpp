// rmtspec command-line interface: analyze, synth, validate, esd.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmtspec/errors.hpp"
#include "rmtspec/esd.hpp"
#include "rmtspec/report.hpp"
#include "rmtspec/synth.hpp"
#include "rmtspec/tensor_io.hpp"
#include "rmtspec/validate.hpp"

namespace fs = std::filesystem;
using namespace rmtspec;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

struct AnalyzeArgs {
  fs::path input;
  fs::path out;
  bool manifest = false;
  std::optional<fs::path> plots;
  std::size_t bins = 100;
  bool log_plots = false;
  bool svg = false;
  AnalysisOptions options;
};

int run_analyze(AnalyzeArgs& a) {
  if (a.plots) {
    fs::create_directories(*a.plots);
    a.options.plot_dir = a.plots;
    a.options.plot.bins = a.bins;
    a.options.plot.log_scale = a.log_plots;
    a.options.plot.svg = a.svg;
  }
  const AnalysisResult result =
      a.manifest ? analyze_manifest(a.input, a.options) : analyze_path(a.input, a.options);
  write_text(a.out, serialize_report(result));
  for (const auto& layer : result.layers) {
    std::printf("%-32s %-14s alpha=%-8s soft_rank=%.4f\n", layer.layer_name.c_str(),
                layer.phase ? std::string(to_string(layer.phase->phase)).c_str() : "unclassified",
                layer.pl_fit ? std::to_string(layer.pl_fit->alpha).substr(0, 6).c_str() : "-",
                layer.metrics.mp_soft_rank);
  }
  for (const auto& e : result.errors) std::fprintf(stderr, "error: %s: %s\n", e.layer_name.c_str(), e.message.c_str());
  if (result.layers.empty()) {
    std::fprintf(stderr, "error: no layer could be analyzed\n");
    return 1;
  }
  return 0;
}

struct SynthArgs {
  std::string kind;
  std::optional<std::size_t> rows, cols, rank, sparsity;
  std::optional<double> mu, sigma_sq, zero_fraction, mix_weight;
  std::vector<double> spikes;
  std::uint64_t seed = 0;
  fs::path out;
};

int run_synth(const SynthArgs& a) {
  SynthSpec spec = default_spec(synth_kind_from_string(a.kind), a.seed);
  if (a.rows) spec.n_rows = *a.rows;
  if (a.cols) spec.n_cols = *a.cols;
  if (a.sigma_sq) spec.sigma_sq = *a.sigma_sq;
  if (a.mu) spec.mu = *a.mu;
  if (a.zero_fraction) spec.zero_fraction = *a.zero_fraction;
  if (a.mix_weight) spec.mix_weight = *a.mix_weight;
  if (a.rank) spec.bleed_rank = *a.rank;
  if (!a.spikes.empty()) {
    spec.spikes.clear();
    for (double s : a.spikes) spec.spikes.push_back({s, std::nullopt});
  }
  if (a.sparsity) {
    for (auto& s : spec.spikes) s.sparsity = *a.sparsity;
  }
  const SynthResult result = generate(spec);
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  save_array(result.matrix, a.out);
  fs::path sidecar = a.out;
  sidecar.replace_extension(".spec.json");
  write_text(sidecar, spec_to_json(spec));
  for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("wrote %s (%zu x %zu) and %s\n", a.out.c_str(), result.matrix.rows(), result.matrix.cols(),
              sidecar.c_str());
  return 0;
}

int run_esd(const fs::path& input, const fs::path& hist, std::size_t bins) {
  const Esd esd = compute_esd(load_array(input));
  if (hist.has_parent_path()) fs::create_directories(hist.parent_path());
  write_histogram_csv(histogram(esd, bins), hist);
  std::printf("M=%zu N=%zu Q=%.4f lambda_min=%.6g lambda_max=%.6g\n", esd.n_cols, esd.n_rows, esd.q,
              esd.lambda_min(), esd.lambda_max());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-matrix spectral analysis of weight matrices"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Fit MP and power-law models and classify each layer");
  analyze->add_option("--input", an.input, "NPY file or manifest.json")->required();
  analyze->add_flag("--manifest", an.manifest, "Treat the input as a manifest regardless of extension");
  analyze->add_option("--out", an.out, "Report JSON path")->required();
  analyze->add_option("--plots", an.plots, "Directory for per-layer plot CSVs");
  analyze->add_option("--bins", an.bins, "Histogram bins for plots")->capture_default_str()->check(CLI::PositiveNumber);
  analyze->add_flag("--log-plots", an.log_plots, "Plot against log10(lambda)");
  analyze->add_flag("--svg", an.svg, "Also write an SVG per layer");
  analyze->add_flag("--deterministic", an.options.deterministic, "Omit the timestamp from the report");
  analyze->add_option("--jobs", an.options.jobs, "Layers analyzed concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  auto& th = an.options.thresholds;
  analyze->add_option("--zero-mass", th.zero_mass, "Rank-collapse zero-mass fraction f0")->capture_default_str();
  analyze->add_option("--alpha-ht", th.alpha_ht, "Largest PL exponent labelled heavy-tailed")->capture_default_str();
  analyze->add_option("--mp-ks", th.mp_ks, "Largest MP KS distance for a good bulk fit")->capture_default_str();
  analyze->add_option("--bleed-mass", th.bleed_mass, "Bleed-out mass fraction beta")->capture_default_str();
  analyze->add_option("--spike-gap", th.spike_gap, "Relative spike gap g")->capture_default_str();
  analyze->add_option("--edge-floor", th.edge_floor, "Floor of the MP edge margin")->capture_default_str();
  analyze->add_option("--max-mp-iterations", an.options.max_mp_iterations, "MP refit iterations")->capture_default_str();
  analyze->add_option("--seed", an.options.power_law.seed, "Seed for alternative-fit restarts")->capture_default_str();

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic weight matrix");
  synth->add_option("--kind", sy.kind, "gaussian|spiked|pareto|bleed|bulk_decay_mix|rank_collapsed")->required();
  synth->add_option("--rows", sy.rows, "N");
  synth->add_option("--cols", sy.cols, "M");
  synth->add_option("--mu", sy.mu, "Pareto tail exponent");
  synth->add_option("--spikes", sy.spikes, "Spike strengths in units of lambda+")->delimiter(',');
  synth->add_option("--spike-sparsity", sy.sparsity, "Nonzeros per spike vector");
  synth->add_option("--sigma-sq", sy.sigma_sq, "Noise variance");
  synth->add_option("--zero-fraction", sy.zero_fraction, "Fraction of zeroed singular values");
  synth->add_option("--mix-weight", sy.mix_weight, "Pareto weight of bulk_decay_mix");
  synth->add_option("--rank", sy.rank, "Perturbation rank of bleed");
  synth->add_option("--seed", sy.seed, "Generator seed")->required();
  synth->add_option("--out", sy.out, "Output .npy")->required();

  std::string suite;
  std::uint64_t validate_seed = 1;
  auto* val = app.add_subcommand("validate", "Run a Monte-Carlo validation suite; prints JSON");
  val->add_option("--suite", suite, "mp|tw|frechet|bpp|csn|gallery")->required();
  val->add_option("--seed", validate_seed, "Base seed")->capture_default_str();

  fs::path esd_input;
  fs::path esd_hist;
  std::size_t esd_bins = 100;
  auto* esd_cmd = app.add_subcommand("esd", "Write the ESD histogram of one matrix");
  esd_cmd->add_option("--input", esd_input, "NPY file")->required();
  esd_cmd->add_option("--hist", esd_hist, "Output CSV")->required();
  esd_cmd->add_option("--bins", esd_bins, "Histogram bins")->capture_default_str()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return run_analyze(an);
    if (*synth) return run_synth(sy);
    if (*val) {
      std::cout << to_json(validate(suite_from_string(suite), validate_seed));
      return 0;
    }
    if (*esd_cmd) return run_esd(esd_input, esd_hist, esd_bins);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
