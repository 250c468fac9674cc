#include "rmtspec/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rmtspec/errors.hpp"

namespace rmtspec {

namespace {

struct Curve {
  std::vector<double> x;
  std::vector<double> y;
};

Curve mp_curve(const MpFit& fit, std::size_t points) {
  Curve c;
  const double width = fit.lambda_plus - fit.lambda_minus;
  // sin² spacing resolves the square-root edges.
  for (std::size_t k = 0; k < points; ++k) {
    const double theta = 0.5 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(points - 1);
    const double s = std::sin(theta);
    const double x = fit.lambda_minus + width * s * s;
    c.x.push_back(x);
    c.y.push_back(mp_density(x, fit.params));
  }
  return c;
}

Curve pl_curve(const PlFit& fit, double x_max, double tail_fraction, std::size_t points) {
  Curve c;
  const double hi = std::max(x_max, fit.x_min * (1.0 + 1e-9));
  const double ratio = std::log(hi / fit.x_min);
  for (std::size_t k = 0; k < points; ++k) {
    const double x = fit.x_min * std::exp(ratio * static_cast<double>(k) / static_cast<double>(points - 1));
    c.x.push_back(x);
    c.y.push_back(tail_fraction * (fit.alpha - 1.0) / fit.x_min * std::pow(x / fit.x_min, -fit.alpha));
  }
  return c;
}

// Maps a curve to log10(x) with density per log10 unit: ρ(x) · x · ln 10.
void to_log(Curve& c) {
  Curve out;
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    if (!(c.x[i] > 0.0)) continue;
    out.x.push_back(std::log10(c.x[i]));
    out.y.push_back(c.y[i] * c.x[i] * std::numbers::ln10);
  }
  c = std::move(out);
}

std::string cell(const std::vector<double>& v, std::size_t i) {
  if (i >= v.size()) return {};
  std::ostringstream os;
  os << std::setprecision(17) << v[i];
  return os.str();
}

void write_svg(const std::filesystem::path& path, const Histogram& h, const Curve& mp, const Curve& pl) {
  constexpr double kW = 640.0;
  constexpr double kH = 400.0;
  double x_lo = h.bin_edges.front();
  double x_hi = h.bin_edges.back();
  double y_hi = *std::max_element(h.densities.begin(), h.densities.end());
  for (const Curve* c : {&mp, &pl}) {
    for (std::size_t i = 0; i < c->x.size(); ++i) {
      x_lo = std::min(x_lo, c->x[i]);
      x_hi = std::max(x_hi, c->x[i]);
      if (std::isfinite(c->y[i])) y_hi = std::max(y_hi, c->y[i]);
    }
  }
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > 0.0)) y_hi = 1.0;
  auto px = [&](double x) { return (x - x_lo) / (x_hi - x_lo) * kW; };
  auto py = [&](double y) { return kH - std::clamp(y / y_hi, 0.0, 1.0) * kH; };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  for (std::size_t b = 0; b < h.densities.size(); ++b) {
    const double x0 = px(h.bin_edges[b]);
    const double x1 = px(h.bin_edges[b + 1]);
    const double y = py(h.densities[b]);
    out << "<rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << std::max(x1 - x0, 0.5) << "\" height=\""
        << kH - y << "\" fill=\"#9bb7d4\"/>\n";
  }
  auto polyline = [&](const Curve& c, const char* colour) {
    if (c.x.empty()) return;
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i) out << px(c.x[i]) << ',' << py(c.y[i]) << ' ';
    out << "\"/>\n";
  };
  polyline(mp, "#c0392b");
  polyline(pl, "#27ae60");
  out << "</svg>\n";
}

}  // namespace

void emit_plot_data(const Esd& esd, const std::optional<MpFit>& mp_fit, const std::optional<PlFit>& pl_fit,
                    const std::filesystem::path& path, const PlotOptions& options) {
  if (esd.eigenvalues.empty()) throw InsufficientDataError("cannot plot an empty spectrum");
  const std::size_t points = std::max<std::size_t>(options.curve_points, 2);

  Histogram hist;
  if (options.log_scale) {
    std::vector<double> logs;
    for (double v : esd.eigenvalues) {
      if (v > 0.0) logs.push_back(std::log10(v));
    }
    if (logs.empty()) throw InsufficientDataError("log-scale plot needs positive eigenvalues");
    hist = histogram(std::span<const double>(logs), options.bins);
  } else {
    hist = histogram(esd, options.bins);
  }

  Curve mp;
  if (mp_fit) mp = mp_curve(*mp_fit, points);
  Curve pl;
  if (pl_fit) {
    const double tail_fraction = static_cast<double>(pl_fit->n_tail) / static_cast<double>(esd.size());
    pl = pl_curve(*pl_fit, esd.lambda_max(), tail_fraction, points);
  }
  if (options.log_scale) {
    to_log(mp);
    to_log(pl);
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "bin_lo,bin_hi,density,mp_x,mp_density,pl_x,pl_density\n";
  const std::size_t rows = std::max({hist.densities.size(), mp.x.size(), pl.x.size()});
  std::vector<double> lo(hist.bin_edges.begin(), hist.bin_edges.end() - 1);
  std::vector<double> hi(hist.bin_edges.begin() + 1, hist.bin_edges.end());
  for (std::size_t i = 0; i < rows; ++i) {
    out << cell(lo, i) << ',' << cell(hi, i) << ',' << cell(hist.densities, i) << ',' << cell(mp.x, i) << ','
        << cell(mp.y, i) << ',' << cell(pl.x, i) << ',' << cell(pl.y, i) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());

  if (options.svg) {
    auto svg_path = path;
    svg_path.replace_extension(".svg");
    write_svg(svg_path, hist, mp, pl);
  }
}

}  // namespace rmtspec
