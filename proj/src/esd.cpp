#include "rmtspec/esd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "rmtspec/errors.hpp"

namespace rmtspec {

namespace {

// Beyond this aspect ratio a thin QR shrinks the SVD problem to M x M.
constexpr double kQrAspect = 1.5;

}  // namespace

SpectralDecomposition decompose(const WeightMatrix& matrix, bool with_vectors) {
  Eigen::MatrixXd w = matrix.view();
  if (w.rows() < w.cols()) w.transposeInPlace();
  const Eigen::Index n = w.rows();
  const Eigen::Index m = w.cols();

  Eigen::MatrixXd core;
  if (static_cast<double>(n) > kQrAspect * static_cast<double>(m)) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
    core = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  } else {
    core = std::move(w);
  }

  const unsigned options = with_vectors ? static_cast<unsigned>(Eigen::ComputeThinV) : 0u;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(core, options);
  if (svd.info() != Eigen::Success) {
    throw NumericError("SVD did not converge for layer '" + matrix.name() + "'");
  }
  SpectralDecomposition out;
  out.singular_values = svd.singularValues();
  if (with_vectors) out.right_vectors = svd.matrixV();
  out.n_rows = static_cast<std::size_t>(n);
  out.n_cols = static_cast<std::size_t>(m);
  return out;
}

Esd Esd::from_values(std::vector<double> values, std::size_t n_rows, std::size_t n_cols, std::string source_name) {
  std::sort(values.begin(), values.end());
  const double top = values.empty() ? 0.0 : values.back();
  const double eps_sym = 1e-10 * top;
  for (double& v : values) {
    if (!std::isfinite(v)) throw DataError("spectrum contains a non-finite value");
    if (v < -eps_sym) throw DataError("spectrum contains a negative value " + std::to_string(v));
    if (v < 0.0) v = 0.0;
  }
  Esd esd;
  esd.eigenvalues = std::move(values);
  esd.n_rows = n_rows;
  esd.n_cols = n_cols;
  esd.q = n_cols == 0 ? 1.0 : static_cast<double>(n_rows) / static_cast<double>(n_cols);
  esd.source_name = std::move(source_name);
  return esd;
}

Esd compute_esd(const WeightMatrix& matrix) {
  const SpectralDecomposition sd = decompose(matrix, false);
  const double inv_n = 1.0 / static_cast<double>(sd.n_rows);
  std::vector<double> values(static_cast<std::size_t>(sd.singular_values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double s = sd.singular_values[static_cast<Eigen::Index>(i)];
    values[i] = s * s * inv_n;
  }
  return Esd::from_values(std::move(values), sd.n_rows, sd.n_cols, matrix.name());
}

Esd pool(std::span<const Esd> members, std::string source_name) {
  if (members.empty()) throw InsufficientDataError("cannot pool an empty ensemble");
  std::vector<double> all;
  for (const auto& e : members) {
    if (e.n_rows != members.front().n_rows || e.n_cols != members.front().n_cols) {
      throw ShapeError("ensemble members have different shapes");
    }
    all.insert(all.end(), e.eigenvalues.begin(), e.eigenvalues.end());
  }
  return Esd::from_values(std::move(all), members.front().n_rows, members.front().n_cols, std::move(source_name));
}

Histogram histogram(std::span<const double> sorted_values, std::size_t n_bins,
                    std::optional<std::pair<double, double>> range) {
  if (n_bins == 0) throw PreconditionError("histogram needs at least one bin");
  if (sorted_values.empty()) throw InsufficientDataError("histogram of an empty spectrum");

  double lo = range ? range->first : sorted_values.front();
  double hi = range ? range->second : sorted_values.back();
  if (!(hi > lo)) {
    // Degenerate spread: one bin centred on the common value.
    const double width = std::max(std::abs(lo) * 1e-6, 1e-12);
    Histogram h;
    h.bin_edges = {lo - width / 2, lo + width / 2};
    h.densities = {1.0 / width};
    return h;
  }

  Histogram h;
  h.bin_edges.resize(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t b = 0; b <= n_bins; ++b) h.bin_edges[b] = lo + width * static_cast<double>(b);
  h.bin_edges.back() = hi;

  std::vector<double> counts(n_bins, 0.0);
  double total = 0.0;
  for (double v : sorted_values) {
    if (v < lo || v > hi) continue;
    auto b = static_cast<std::size_t>((v - lo) / width);
    b = std::min(b, n_bins - 1);
    counts[b] += 1.0;
    total += 1.0;
  }
  h.densities.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double bw = h.bin_edges[b + 1] - h.bin_edges[b];
    h.densities[b] = total > 0 ? counts[b] / (total * bw) : 0.0;
  }
  return h;
}

Histogram histogram(const Esd& esd, std::size_t n_bins, std::optional<std::pair<double, double>> range) {
  return histogram(std::span<const double>(esd.eigenvalues), n_bins, range);
}

double empirical_cdf(const Esd& esd, double x) {
  if (esd.eigenvalues.empty()) return 0.0;
  const auto it = std::upper_bound(esd.eigenvalues.begin(), esd.eigenvalues.end(), x);
  return static_cast<double>(it - esd.eigenvalues.begin()) / static_cast<double>(esd.eigenvalues.size());
}

void write_histogram_csv(const Histogram& hist, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "bin_lo,bin_hi,density\n" << std::setprecision(17);
  for (std::size_t b = 0; b < hist.densities.size(); ++b) {
    out << hist.bin_edges[b] << ',' << hist.bin_edges[b + 1] << ',' << hist.densities[b] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace rmtspec
