#include "rmtspec/report.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <thread>

#include <nlohmann/json.hpp>

#include "rmtspec/errors.hpp"

#ifndef RMTSPEC_VERSION
#define RMTSPEC_VERSION "0.0.0"
#endif

namespace rmtspec {

using nlohmann::json;

std::string tool_version() { return RMTSPEC_VERSION; }

namespace {

template <typename T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// nlohmann ADL hooks.
void to_json(json& j, const MpFit& f) {
  j = {{"sigma_sq", f.params.sigma_sq}, {"q", f.params.q},         {"lambda_minus", f.lambda_minus},
       {"lambda_plus", f.lambda_plus},  {"ks_distance", f.ks_distance}, {"n_bulk", f.n_bulk},
       {"n_excluded", f.n_excluded},    {"converged", f.converged}, {"iterations", f.iterations}};
}

void from_json(const json& j, MpFit& f) {
  f.params.sigma_sq = j.at("sigma_sq").get<double>();
  f.params.q = j.at("q").get<double>();
  f.lambda_minus = j.at("lambda_minus").get<double>();
  f.lambda_plus = j.at("lambda_plus").get<double>();
  f.ks_distance = j.at("ks_distance").get<double>();
  f.n_bulk = j.at("n_bulk").get<std::size_t>();
  f.n_excluded = j.at("n_excluded").get<std::size_t>();
  f.converged = j.at("converged").get<bool>();
  f.iterations = j.at("iterations").get<int>();
}

void to_json(json& j, const AlternativeComparison& c) {
  j = {{"model", std::string(to_string(c.model))},
       {"log_likelihood_ratio", c.log_likelihood_ratio},
       {"p_value", c.p_value},
       {"preferred", c.preferred},
       {"indeterminate", c.indeterminate},
       {"params", c.params}};
}

void from_json(const json& j, AlternativeComparison& c) {
  c.model = alt_model_from_string(j.at("model").get<std::string>());
  c.log_likelihood_ratio = j.at("log_likelihood_ratio").get<double>();
  c.p_value = j.at("p_value").get<double>();
  c.preferred = j.at("preferred").get<bool>();
  c.indeterminate = j.value("indeterminate", false);
  c.params = j.value("params", std::vector<double>{});
}

void to_json(json& j, const PlFit& f) {
  j = {{"alpha", f.alpha},
       {"x_min", f.x_min},
       {"n_tail", f.n_tail},
       {"ks_distance", f.ks_distance},
       {"alternatives", f.alternatives},
       {"mu", f.mu},
       {"universality_class", std::string(to_string(f.universality_class))}};
}

void from_json(const json& j, PlFit& f) {
  f.alpha = j.at("alpha").get<double>();
  f.x_min = j.at("x_min").get<double>();
  f.n_tail = j.at("n_tail").get<std::size_t>();
  f.ks_distance = j.at("ks_distance").get<double>();
  f.alternatives = j.at("alternatives").get<std::vector<AlternativeComparison>>();
  f.mu = j.at("mu").get<double>();
  f.universality_class = universality_class_from_string(j.at("universality_class").get<std::string>());
}

void to_json(json& j, const LayerMetrics& m) {
  j = {{"mp_soft_rank", m.mp_soft_rank},   {"stable_rank", m.stable_rank},
       {"entropy", m.entropy},             {"lambda_max", m.lambda_max},
       {"spike_count", m.spike_count},     {"bulk_ipr_mean", m.bulk_ipr_mean},
       {"spike_ipr_mean", optional_to_json(m.spike_ipr_mean)}};
}

void from_json(const json& j, LayerMetrics& m) {
  m.mp_soft_rank = j.at("mp_soft_rank").get<double>();
  m.stable_rank = j.at("stable_rank").get<double>();
  m.entropy = j.at("entropy").get<double>();
  m.lambda_max = j.at("lambda_max").get<double>();
  m.spike_count = j.at("spike_count").get<std::size_t>();
  m.bulk_ipr_mean = j.at("bulk_ipr_mean").get<double>();
  m.spike_ipr_mean = optional_from_json<double>(j, "spike_ipr_mean");
}

void to_json(json& j, const PhaseLabel& p) {
  j = {{"label", std::string(to_string(p.phase))}, {"rationale", p.rationale}};
}

void from_json(const json& j, PhaseLabel& p) {
  p.phase = phase_from_string(j.at("label").get<std::string>());
  p.rationale = j.at("rationale").get<std::vector<std::string>>();
}

void to_json(json& j, const PhaseReport& r) {
  j = {{"layer_name", r.layer_name},
       {"shape", r.shape},
       {"q", r.q},
       {"metrics", r.metrics},
       {"mp_fit", optional_to_json(r.mp_fit)},
       {"pl_fit", optional_to_json(r.pl_fit)},
       {"phase", optional_to_json(r.phase)},
       {"warnings", r.warnings},
       {"tool_version", r.tool_version},
       {"seed", optional_to_json(r.seed)}};
}

void from_json(const json& j, PhaseReport& r) {
  r.layer_name = j.at("layer_name").get<std::string>();
  r.shape = j.at("shape").get<std::array<std::size_t, 2>>();
  r.q = j.at("q").get<double>();
  r.metrics = j.at("metrics").get<LayerMetrics>();
  r.mp_fit = optional_from_json<MpFit>(j, "mp_fit");
  r.pl_fit = optional_from_json<PlFit>(j, "pl_fit");
  r.phase = optional_from_json<PhaseLabel>(j, "phase");
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  r.tool_version = j.at("tool_version").get<std::string>();
  r.seed = optional_from_json<std::uint64_t>(j, "seed");
}

namespace {

std::string file_safe(const std::string& name) {
  std::string out = name.empty() ? "layer" : name;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out;
}

PhaseReport analyze_impl(const Esd& esd, const WeightMatrix* matrix, const AnalysisOptions& options) {
  PhaseReport report;
  report.layer_name = esd.source_name;
  report.shape = {esd.n_rows, esd.n_cols};
  report.q = esd.q;
  report.tool_version = tool_version();
  auto& warnings = report.warnings;

  const double edge_floor = options.thresholds.edge_floor;
  try {
    MpFitOptions mp_options;
    mp_options.edge_floor = edge_floor;
    mp_options.max_iterations = options.max_mp_iterations;
    report.mp_fit = fit_mp(esd, mp_options);
    if (!report.mp_fit->converged) warnings.push_back("MP fit did not converge; treated as no MP bulk");
  } catch (const Error& e) {
    warnings.push_back(std::string("no MP fit: ") + e.what());
  }

  try {
    PlFit pl = fit_power_law(esd, options.power_law);
    report.pl_fit = compare_alternatives(esd, std::move(pl), options.power_law);
    for (auto& w : power_law_warnings(*report.pl_fit)) warnings.push_back(std::move(w));
    for (const auto& alt : report.pl_fit->alternatives) {
      if (alt.indeterminate) warnings.push_back("alternative " + std::string(to_string(alt.model)) + " indeterminate");
    }
  } catch (const Error& e) {
    warnings.push_back(std::string("no power-law fit: ") + e.what());
  }

  auto& m = report.metrics;
  m.lambda_max = esd.lambda_max();
  try {
    m.mp_soft_rank = mp_soft_rank(report.mp_fit, esd);
    m.stable_rank = stable_rank(esd);
    m.entropy = spectral_entropy(esd);
  } catch (const UndefinedMetricError& e) {
    warnings.push_back(std::string("metrics undefined: ") + e.what());
  }

  const std::optional<MpFit> usable_fit =
      report.mp_fit && report.mp_fit->converged ? report.mp_fit : std::optional<MpFit>{};
  if (matrix != nullptr) {
    const auto loc = localization_summary(*matrix, usable_fit, edge_floor);
    m.spike_count = loc.spike_count;
    m.bulk_ipr_mean = loc.bulk_ipr_mean;
    m.spike_ipr_mean = loc.spike_ipr_mean;
  } else if (usable_fit) {
    m.spike_count = spike_statistics(esd, *usable_fit, edge_floor).spike_count;
  }

  try {
    report.phase = classify(gather_evidence(esd, report.mp_fit, report.pl_fit, edge_floor), options.thresholds);
  } catch (const UnclassifiableError& e) {
    warnings.push_back(std::string("unclassified: ") + e.what());
  }
  if (options.plot_dir) {
    try {
      emit_plot_data(esd, report.mp_fit, report.pl_fit, *options.plot_dir / (file_safe(report.layer_name) + ".csv"),
                     options.plot);
    } catch (const Error& e) {
      warnings.push_back(std::string("plot not written: ") + e.what());
    }
  }
  return report;
}

}  // namespace

PhaseReport analyze_matrix(const WeightMatrix& matrix, const AnalysisOptions& options) {
  return analyze_impl(compute_esd(matrix), &matrix, options);
}

PhaseReport analyze_spectrum(const Esd& esd, const AnalysisOptions& options) {
  return analyze_impl(esd, nullptr, options);
}

namespace {

// Runs tasks[i] for every i on up to `jobs` threads; results stay indexed.
template <typename Task>
void parallel_for(std::size_t count, unsigned jobs, Task&& task) {
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
}

struct Slot {
  std::optional<PhaseReport> report;
  std::optional<LayerError> error;
};

AnalysisResult collect(std::vector<Slot>& slots, const AnalysisOptions& options) {
  AnalysisResult result;
  for (auto& s : slots) {
    if (s.report) result.layers.push_back(std::move(*s.report));
    if (s.error) result.errors.push_back(std::move(*s.error));
  }
  if (!options.deterministic) result.generated_at = utc_now();
  return result;
}

}  // namespace

AnalysisResult analyze_matrices(const std::vector<WeightMatrix>& matrices, const AnalysisOptions& options) {
  std::vector<Slot> slots(matrices.size());
  parallel_for(matrices.size(), options.jobs, [&](std::size_t i) {
    try {
      slots[i].report = analyze_matrix(matrices[i], options);
    } catch (const std::exception& e) {
      slots[i].error = LayerError{matrices[i].name(), e.what()};
    }
  });
  return collect(slots, options);
}

AnalysisResult analyze_array(const std::filesystem::path& npy, const AnalysisOptions& options) {
  std::vector<Slot> slots(1);
  try {
    slots[0].report = analyze_matrix(load_array(npy), options);
  } catch (const std::exception& e) {
    slots[0].error = LayerError{npy.stem().string(), e.what()};
  }
  return collect(slots, options);
}

AnalysisResult analyze_manifest(const std::filesystem::path& manifest_path, const AnalysisOptions& options) {
  const Manifest manifest = read_manifest(manifest_path);
  std::vector<Slot> slots(manifest.layers.size());
  parallel_for(manifest.layers.size(), options.jobs, [&](std::size_t i) {
    const auto& layer = manifest.layers[i];
    try {
      slots[i].report = analyze_matrix(load_manifest_layer(layer), options);
    } catch (const std::exception& e) {
      slots[i].error = LayerError{layer.name, e.what()};
    }
  });
  return collect(slots, options);
}

AnalysisResult analyze_path(const std::filesystem::path& input, const AnalysisOptions& options) {
  return input.extension() == ".json" ? analyze_manifest(input, options) : analyze_array(input, options);
}

std::string serialize_report(const AnalysisResult& result) {
  json doc;
  doc["version"] = result.version;
  if (result.generated_at) doc["generated_at"] = *result.generated_at;
  doc["layers"] = result.layers;
  doc["errors"] = json::array();
  for (const auto& e : result.errors) doc["errors"].push_back({{"layer_name", e.layer_name}, {"error", e.message}});
  return doc.dump(2) + "\n";
}

AnalysisResult parse_report(const std::string& text) {
  try {
    const json doc = json::parse(text);
    AnalysisResult result;
    result.version = doc.at("version").get<std::string>();
    result.generated_at = optional_from_json<std::string>(doc, "generated_at");
    result.layers = doc.at("layers").get<std::vector<PhaseReport>>();
    if (doc.contains("errors")) {
      for (const auto& e : doc.at("errors")) {
        result.errors.push_back({e.at("layer_name").get<std::string>(), e.at("error").get<std::string>()});
      }
    }
    return result;
  } catch (const json::exception& e) {
    throw FormatError(std::string("report JSON: ") + e.what());
  }
}

}  // namespace rmtspec
