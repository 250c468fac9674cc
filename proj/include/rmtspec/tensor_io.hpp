#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace rmtspec {

enum class LayerKind { dense, other };

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view text);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A named, immutable 2-D real matrix. Construction validates shape and
/// finiteness, so every live instance satisfies the invariants.
class WeightMatrix {
 public:
  WeightMatrix(std::string name, std::size_t rows, std::size_t cols, std::vector<double> data,
               LayerKind kind = LayerKind::dense);

  /// Copies an Eigen matrix (any storage order) into row-major storage.
  static WeightMatrix from_eigen(std::string name, const Eigen::MatrixXd& m,
                                 LayerKind kind = LayerKind::dense);

  const std::string& name() const { return name_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  LayerKind layer_kind() const { return kind_; }
  std::span<const double> data() const { return data_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Eigen::Map<const RowMatrix> view() const {
    return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)};
  }

  WeightMatrix renamed(std::string name) const;

  friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

 private:
  std::string name_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  LayerKind kind_;
};

/// Reads an NPY v1.0 file: 2-D, C order, little-endian '<f4' or '<f8'.
/// float32 is widened to float64. The name is the file stem.
WeightMatrix load_array(const std::filesystem::path& path);

/// Writes NPY v1.0, '<f8', C order.
void save_array(const WeightMatrix& matrix, const std::filesystem::path& path);

/// In-memory variants used by the file functions and by tests.
WeightMatrix parse_npy(std::span<const std::byte> bytes, std::string name);
std::vector<std::byte> encode_npy(const WeightMatrix& matrix);

struct ManifestLayer {
  std::string name;
  std::filesystem::path file;  // read_manifest resolves it against the manifest directory
  std::size_t rows = 0;
  std::size_t cols = 0;
  LayerKind layer_kind = LayerKind::dense;
};

struct Manifest {
  std::string version;
  std::vector<ManifestLayer> layers;
};

/// Parses manifest.json without touching the referenced arrays.
/// Rejects malformed JSON and duplicate layer names.
Manifest read_manifest(const std::filesystem::path& path);

/// Loads a single manifest entry, checking the file header against the
/// declared shape.
WeightMatrix load_manifest_layer(const ManifestLayer& layer);

/// Loads every layer in manifest order. Any failure aborts.
std::vector<WeightMatrix> load_manifest(const std::filesystem::path& path);

/// Writes each layer's `file` verbatim, so it should be relative to the manifest.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace rmtspec
