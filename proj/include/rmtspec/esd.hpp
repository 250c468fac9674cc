#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rmtspec/tensor_io.hpp"

namespace rmtspec {

/// Empirical spectral density of X = (1/N) WᵀW with W oriented so N >= M.
struct Esd {
  std::vector<double> eigenvalues;  // ascending, >= 0, length M
  std::size_t n_rows = 0;           // N, the larger dimension
  std::size_t n_cols = 0;           // M, the smaller dimension
  double q = 1.0;                   // N / M
  std::string source_name;

  std::size_t size() const { return eigenvalues.size(); }
  double lambda_max() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back(); }
  double lambda_min() const { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }

  /// Wraps raw values (sorted and clamped here) as a spectrum; for samples
  /// that did not come from a matrix, n_rows/n_cols describe the nominal shape.
  static Esd from_values(std::vector<double> values, std::size_t n_rows, std::size_t n_cols,
                         std::string source_name = {});

  friend bool operator==(const Esd&, const Esd&) = default;
};

struct Histogram {
  std::vector<double> bin_edges;  // length B + 1, ascending
  std::vector<double> densities;  // length B, integrates to 1
};

/// Singular values of W (any orientation), descending, plus optionally the
/// right singular vectors of the N >= M oriented matrix as columns.
struct SpectralDecomposition {
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd right_vectors;  // M x M, empty unless requested
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
};

SpectralDecomposition decompose(const WeightMatrix& matrix, bool with_vectors);

Esd compute_esd(const WeightMatrix& matrix);

/// Pools the eigenvalues of several spectra (an ensemble of runs) into one.
/// Shapes must agree.
Esd pool(std::span<const Esd> members, std::string source_name = "ensemble");

/// Density-normalized equal-width histogram over [min, max] unless a range is
/// given. Values outside the range are ignored.
Histogram histogram(const Esd& esd, std::size_t n_bins, std::optional<std::pair<double, double>> range = std::nullopt);
Histogram histogram(std::span<const double> sorted_values, std::size_t n_bins,
                    std::optional<std::pair<double, double>> range = std::nullopt);

/// Fraction of eigenvalues <= x.
double empirical_cdf(const Esd& esd, double x);

/// CSV with columns bin_lo, bin_hi, density.
void write_histogram_csv(const Histogram& hist, const std::filesystem::path& path);

}  // namespace rmtspec
