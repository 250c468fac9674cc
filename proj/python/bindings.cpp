#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmtspec/errors.hpp"
#include "rmtspec/esd.hpp"
#include "rmtspec/mp.hpp"
#include "rmtspec/powerlaw.hpp"
#include "rmtspec/report.hpp"
#include "rmtspec/synth.hpp"
#include "rmtspec/tensor_io.hpp"
#include "rmtspec/validate.hpp"

namespace py = pybind11;
using namespace rmtspec;

namespace {

using Array2 = py::array_t<double, py::array::c_style | py::array::forcecast>;

WeightMatrix to_matrix(const Array2& a, const std::string& name) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array, got " + std::to_string(a.ndim()) + "-D");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return WeightMatrix(name, rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::array_t<double> to_numpy(const WeightMatrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::dict mp_dict(const MpFit& f) {
  py::dict d;
  d["sigma_sq"] = f.params.sigma_sq;
  d["q"] = f.params.q;
  d["lambda_minus"] = f.lambda_minus;
  d["lambda_plus"] = f.lambda_plus;
  d["ks_distance"] = f.ks_distance;
  d["n_bulk"] = f.n_bulk;
  d["n_excluded"] = f.n_excluded;
  d["converged"] = f.converged;
  d["iterations"] = f.iterations;
  return d;
}

py::dict pl_dict(const PlFit& f) {
  py::dict d;
  d["alpha"] = f.alpha;
  d["x_min"] = f.x_min;
  d["n_tail"] = f.n_tail;
  d["ks_distance"] = f.ks_distance;
  d["mu"] = f.mu;
  d["universality_class"] = std::string(to_string(f.universality_class));
  py::list alts;
  for (const auto& a : f.alternatives) {
    py::dict c;
    c["model"] = std::string(to_string(a.model));
    c["log_likelihood_ratio"] = a.log_likelihood_ratio;
    c["p_value"] = a.p_value;
    c["preferred"] = a.preferred;
    alts.append(c);
  }
  d["alternatives"] = alts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rmtspec, m) {
  m.doc() = "Random-matrix spectral analysis of weight matrices";
  m.attr("__version__") = tool_version();

  py::register_exception<Error>(m, "RmtspecError", PyExc_ValueError);

  m.def(
      "eigenvalues",
      [](const Array2& a) {
        const Esd esd = compute_esd(to_matrix(a, "array"));
        py::array_t<double> out(static_cast<py::ssize_t>(esd.eigenvalues.size()));
        std::copy(esd.eigenvalues.begin(), esd.eigenvalues.end(), out.mutable_data());
        return out;
      },
      py::arg("matrix"), "Ascending eigenvalues of (1/N) W^T W after orienting N >= M.");

  m.def(
      "fit_mp",
      [](std::vector<double> eigenvalues, std::size_t n_rows, std::size_t n_cols) {
        return mp_dict(fit_mp(Esd::from_values(std::move(eigenvalues), n_rows, n_cols, "values")));
      },
      py::arg("eigenvalues"), py::arg("n_rows"), py::arg("n_cols"));

  m.def(
      "fit_power_law",
      [](const std::vector<double>& values, bool compare) {
        PlFit fit = fit_power_law(values);
        if (compare) fit = compare_alternatives(values, fit);
        return pl_dict(fit);
      },
      py::arg("values"), py::arg("compare") = true);

  m.def(
      "analyze_json",
      [](const Array2& a, const std::string& name) {
        AnalysisOptions options;
        options.deterministic = true;
        return serialize_report(analyze_matrices({to_matrix(a, name)}, options));
      },
      py::arg("matrix"), py::arg("name") = "layer");

  m.def(
      "analyze_path_json",
      [](const std::filesystem::path& path, bool deterministic, unsigned jobs) {
        AnalysisOptions options;
        options.deterministic = deterministic;
        options.jobs = jobs;
        py::gil_scoped_release release;
        return serialize_report(analyze_path(path, options));
      },
      py::arg("path"), py::arg("deterministic") = true, py::arg("jobs") = 1);

  m.def(
      "synth",
      [](const std::string& kind, std::uint64_t seed, std::optional<std::size_t> rows, std::optional<std::size_t> cols,
         std::optional<double> mu, std::optional<std::vector<double>> spikes, std::optional<double> sigma_sq) {
        SynthSpec spec = default_spec(synth_kind_from_string(kind), seed);
        if (rows) spec.n_rows = *rows;
        if (cols) spec.n_cols = *cols;
        if (mu) spec.mu = *mu;
        if (sigma_sq) spec.sigma_sq = *sigma_sq;
        if (spikes) {
          spec.spikes.clear();
          for (double s : *spikes) spec.spikes.push_back({s, std::nullopt});
        }
        return to_numpy(generate(spec).matrix);
      },
      py::arg("kind"), py::arg("seed"), py::arg("rows") = py::none(), py::arg("cols") = py::none(),
      py::arg("mu") = py::none(), py::arg("spikes") = py::none(), py::arg("sigma_sq") = py::none());

  m.def(
      "load_npy", [](const std::filesystem::path& path) { return to_numpy(load_array(path)); }, py::arg("path"));

  m.def(
      "validate_json",
      [](const std::string& suite, std::uint64_t seed) {
        const Suite s = suite_from_string(suite);
        py::gil_scoped_release release;
        return to_json(validate(s, seed));
      },
      py::arg("suite"), py::arg("seed") = 1);
}
