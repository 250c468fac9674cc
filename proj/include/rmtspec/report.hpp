#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmtspec/esd.hpp"
#include "rmtspec/metrics.hpp"
#include "rmtspec/mp.hpp"
#include "rmtspec/phases.hpp"
#include "rmtspec/plot.hpp"
#include "rmtspec/powerlaw.hpp"
#include "rmtspec/tensor_io.hpp"

namespace rmtspec {

std::string tool_version();

struct PhaseReport {
  std::string layer_name;
  std::array<std::size_t, 2> shape{};  // [N, M], N >= M
  double q = 1.0;
  LayerMetrics metrics;
  std::optional<MpFit> mp_fit;
  std::optional<PlFit> pl_fit;
  std::optional<PhaseLabel> phase;  // null only when nothing could be fit
  std::vector<std::string> warnings;
  std::string tool_version;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const PhaseReport&, const PhaseReport&) = default;
};

struct LayerError {
  std::string layer_name;
  std::string message;

  friend bool operator==(const LayerError&, const LayerError&) = default;
};

struct AnalysisResult {
  std::string version = "1";
  std::vector<PhaseReport> layers;
  std::vector<LayerError> errors;
  std::optional<std::string> generated_at;  // omitted in deterministic mode

  friend bool operator==(const AnalysisResult&, const AnalysisResult&) = default;
};

struct AnalysisOptions {
  PhaseThresholds thresholds;
  PowerLawOptions power_law;
  int max_mp_iterations = 20;
  unsigned jobs = 1;
  bool deterministic = false;
  // When set, each layer also gets <plot_dir>/<layer>.csv (see emit_plot_data).
  std::optional<std::filesystem::path> plot_dir;
  PlotOptions plot;
};

/// Full per-layer pipeline: ESD, MP fit, power-law fit and comparisons,
/// metrics, phase. Fit failures become null fields plus warnings; only a
/// failing eigensolve propagates.
PhaseReport analyze_matrix(const WeightMatrix& matrix, const AnalysisOptions& options = {});

/// Same pipeline on a precomputed spectrum (no localization metrics).
PhaseReport analyze_spectrum(const Esd& esd, const AnalysisOptions& options = {});

/// Analyzes a list of matrices concurrently (up to options.jobs), keeping input order.
AnalysisResult analyze_matrices(const std::vector<WeightMatrix>& matrices, const AnalysisOptions& options = {});

AnalysisResult analyze_array(const std::filesystem::path& npy, const AnalysisOptions& options = {});
AnalysisResult analyze_manifest(const std::filesystem::path& manifest, const AnalysisOptions& options = {});

/// Analyzes a single .npy file or, for a .json path, every manifest layer.
/// Layers that fail to load or decompose become entries in `errors`.
AnalysisResult analyze_path(const std::filesystem::path& input, const AnalysisOptions& options = {});

std::string serialize_report(const AnalysisResult& result);
AnalysisResult parse_report(const std::string& text);

}  // namespace rmtspec
