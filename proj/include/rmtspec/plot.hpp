#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "rmtspec/esd.hpp"
#include "rmtspec/mp.hpp"
#include "rmtspec/powerlaw.hpp"

namespace rmtspec {

struct PlotOptions {
  std::size_t bins = 100;
  std::size_t curve_points = 500;
  bool log_scale = false;  // emit log10(λ) on every x column, densities per log10 unit
  bool svg = false;        // also write <path>.svg
};

/// Writes a CSV overlaying the ESD histogram, the fitted MP density and the
/// power-law tail density.
///
/// Columns: bin_lo, bin_hi, density, mp_x, mp_density, pl_x, pl_density. The
/// three groups have independent lengths; missing cells are empty, and a
/// missing fit leaves its columns empty. The MP curve integrates to 1; the
/// power-law curve is scaled by the tail fraction n_tail / M so that it
/// overlays the histogram.
void emit_plot_data(const Esd& esd, const std::optional<MpFit>& mp_fit, const std::optional<PlFit>& pl_fit,
                    const std::filesystem::path& path, const PlotOptions& options = {});

}  // namespace rmtspec
