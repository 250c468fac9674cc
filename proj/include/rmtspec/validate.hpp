#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmtspec {

/// Monte-Carlo checks against synthetic ground truth.
enum class Suite { mp, tw, frechet, bpp, csn, gallery };

std::string_view to_string(Suite suite);
Suite suite_from_string(std::string_view text);

struct SuiteCheck {
  std::string name;
  double value = 0.0;
  std::string criterion;  // human-readable acceptance rule
  bool pass = false;
};

struct SuiteResult {
  Suite suite = Suite::mp;
  std::uint64_t seed = 0;
  bool pass = false;
  double runtime_seconds = 0.0;
  std::vector<SuiteCheck> checks;
  std::map<std::string, double> statistics;
  // gallery only: rows are generator phases, columns predicted phases, both
  // in Phase order.
  std::optional<std::array<std::array<int, 6>, 6>> confusion;
};

SuiteResult validate(Suite suite, std::uint64_t seed);

std::string to_json(const SuiteResult& result);

/// Seed of trial `index` in stream `stream` of a suite run with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

}  // namespace rmtspec
