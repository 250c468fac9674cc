#include "rmtspec/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rmtspec/errors.hpp"

namespace rmtspec {

static_assert(std::endian::native == std::endian::little, "NPY codec assumes a little-endian host");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreludeLen = 10;  // magic + version + u16 header length

void check_finite(std::span<const double> data, const std::string& name) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw DataError("matrix '" + name + "' has a non-finite entry at flat index " + std::to_string(i));
    }
  }
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return bytes;
}

struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

NpyHeader parse_header_dict(const std::string& dict) {
  NpyHeader header;
  static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex fortran_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
  std::smatch m;
  if (!std::regex_search(dict, m, descr_re)) throw FormatError("npy header lacks 'descr'");
  header.descr = m[1];
  if (!std::regex_search(dict, m, fortran_re)) throw FormatError("npy header lacks 'fortran_order'");
  header.fortran_order = (m[1] == "True");
  if (!std::regex_search(dict, m, shape_re)) throw FormatError("npy header lacks 'shape'");
  const std::string dims = m[1];
  static const std::regex int_re(R"(\d+)");
  for (auto it = std::sregex_iterator(dims.begin(), dims.end(), int_re); it != std::sregex_iterator(); ++it) {
    header.shape.push_back(static_cast<std::size_t>(std::stoull(it->str())));
  }
  return header;
}

}  // namespace

std::string_view to_string(LayerKind kind) { return kind == LayerKind::dense ? "dense" : "other"; }

LayerKind layer_kind_from_string(std::string_view text) {
  if (text == "dense") return LayerKind::dense;
  if (text == "other") return LayerKind::other;
  throw FormatError("unknown layer_kind '" + std::string(text) + "'");
}

WeightMatrix::WeightMatrix(std::string name, std::size_t rows, std::size_t cols, std::vector<double> data,
                           LayerKind kind)
    : name_(std::move(name)), rows_(rows), cols_(cols), data_(std::move(data)), kind_(kind) {
  if (rows_ < 2 || cols_ < 2) {
    throw ShapeError("matrix '" + name_ + "' must be at least 2x2, got " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix '" + name_ + "' data length does not equal rows*cols");
  }
  check_finite(data_, name_);
}

WeightMatrix WeightMatrix::from_eigen(std::string name, const Eigen::MatrixXd& m, LayerKind kind) {
  std::vector<double> data(static_cast<std::size_t>(m.size()));
  Eigen::Map<RowMatrix>(data.data(), m.rows(), m.cols()) = m;
  return {std::move(name), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), std::move(data),
          kind};
}

WeightMatrix WeightMatrix::renamed(std::string name) const {
  WeightMatrix copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

WeightMatrix parse_npy(std::span<const std::byte> bytes, std::string name) {
  if (bytes.size() < kPreludeLen || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    throw FormatError("'" + name + "': bad NPY magic");
  }
  const auto major = static_cast<unsigned>(bytes[6]);
  const auto minor = static_cast<unsigned>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw FormatError("'" + name + "': unsupported NPY version " + std::to_string(major) + "." + std::to_string(minor));
  }
  const std::size_t header_len = static_cast<std::size_t>(bytes[8]) | (static_cast<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < kPreludeLen + header_len) throw FormatError("'" + name + "': truncated NPY header");
  const std::string dict(reinterpret_cast<const char*>(bytes.data()) + kPreludeLen, header_len);
  const NpyHeader header = parse_header_dict(dict);

  if (header.descr != "<f8" && header.descr != "<f4") {
    throw FormatError("'" + name + "': unsupported dtype '" + header.descr + "' (need <f4 or <f8)");
  }
  if (header.fortran_order) throw FormatError("'" + name + "': Fortran-order arrays are not accepted");
  if (header.shape.size() != 2) {
    throw ShapeError("'" + name + "': expected 2 dimensions, got " + std::to_string(header.shape.size()));
  }
  const std::size_t rows = header.shape[0];
  const std::size_t cols = header.shape[1];
  const std::size_t count = rows * cols;
  const std::size_t width = header.descr == "<f8" ? 8 : 4;
  const std::size_t offset = kPreludeLen + header_len;
  if (bytes.size() - offset != count * width) {
    throw FormatError("'" + name + "': payload size does not match header shape");
  }
  std::vector<double> data(count);
  const std::byte* payload = bytes.data() + offset;
  if (width == 8) {
    std::memcpy(data.data(), payload, count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float value;
      std::memcpy(&value, payload + i * 4, 4);
      data[i] = static_cast<double>(value);
    }
  }
  return {std::move(name), rows, cols, std::move(data)};
}

std::vector<std::byte> encode_npy(const WeightMatrix& matrix) {
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" + std::to_string(matrix.rows()) + ", " +
                     std::to_string(matrix.cols()) + "), }";
  // Pad so that the payload starts on a 64-byte boundary; the header ends in '\n'.
  const std::size_t unpadded = kPreludeLen + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');

  std::vector<std::byte> out(kPreludeLen + dict.size() + matrix.data().size_bytes());
  std::memcpy(out.data(), kMagic, kMagicLen);
  out[6] = std::byte{1};
  out[7] = std::byte{0};
  out[8] = static_cast<std::byte>(dict.size() & 0xff);
  out[9] = static_cast<std::byte>((dict.size() >> 8) & 0xff);
  std::memcpy(out.data() + kPreludeLen, dict.data(), dict.size());
  std::memcpy(out.data() + kPreludeLen + dict.size(), matrix.data().data(), matrix.data().size_bytes());
  return out;
}

WeightMatrix load_array(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_npy(bytes, path.stem().string());
}

void save_array(const WeightMatrix& matrix, const std::filesystem::path& path) {
  // WeightMatrix cannot hold NaN/Inf, so the data check already happened at construction.
  const auto bytes = encode_npy(matrix);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  Manifest manifest;
  const auto base = path.parent_path();
  std::unordered_set<std::string> seen;
  try {
    manifest.version = doc.at("version").get<std::string>();
    for (const auto& entry : doc.at("layers")) {
      ManifestLayer layer;
      layer.name = entry.at("name").get<std::string>();
      layer.file = base / entry.at("file").get<std::string>();
      const auto& shape = entry.at("shape");
      if (!shape.is_array() || shape.size() != 2) throw ShapeError("layer '" + layer.name + "': shape must be [r, c]");
      layer.rows = shape[0].get<std::size_t>();
      layer.cols = shape[1].get<std::size_t>();
      layer.layer_kind = layer_kind_from_string(entry.value("layer_kind", std::string("dense")));
      if (!seen.insert(layer.name).second) throw FormatError("duplicate layer name '" + layer.name + "'");
      manifest.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  return manifest;
}

WeightMatrix load_manifest_layer(const ManifestLayer& layer) {
  if (!std::filesystem::exists(layer.file)) {
    throw IoError("layer '" + layer.name + "': missing file " + layer.file.string());
  }
  const auto bytes = read_file(layer.file);
  WeightMatrix m = parse_npy(bytes, layer.name);
  if (m.rows() != layer.rows || m.cols() != layer.cols) {
    throw ShapeError("layer '" + layer.name + "': manifest shape " + std::to_string(layer.rows) + "x" +
                     std::to_string(layer.cols) + " disagrees with file shape " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
  return {layer.name, m.rows(), m.cols(), {m.data().begin(), m.data().end()}, layer.layer_kind};
}

std::vector<WeightMatrix> load_manifest(const std::filesystem::path& path) {
  const Manifest manifest = read_manifest(path);
  std::vector<WeightMatrix> out;
  out.reserve(manifest.layers.size());
  for (const auto& layer : manifest.layers) out.push_back(load_manifest_layer(layer));
  return out;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["version"] = manifest.version;
  doc["layers"] = nlohmann::json::array();
  for (const auto& layer : manifest.layers) {
    doc["layers"].push_back({{"name", layer.name},
                             {"file", layer.file.generic_string()},
                             {"shape", {layer.rows, layer.cols}},
                             {"layer_kind", std::string(to_string(layer.layer_kind))}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

}  // namespace rmtspec
