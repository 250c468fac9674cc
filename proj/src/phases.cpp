#include "rmtspec/phases.hpp"

#include <algorithm>
#include <cstdio>

#include "rmtspec/errors.hpp"

namespace rmtspec {

namespace {

constexpr double kZeroEps = 1e-9;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::random_like: return "random_like";
    case Phase::bleeding_out: return "bleeding_out";
    case Phase::bulk_spikes: return "bulk_spikes";
    case Phase::bulk_decay: return "bulk_decay";
    case Phase::heavy_tailed: return "heavy_tailed";
    case Phase::rank_collapse: return "rank_collapse";
  }
  return "random_like";
}

Phase phase_from_string(std::string_view text) {
  for (auto p : {Phase::random_like, Phase::bleeding_out, Phase::bulk_spikes, Phase::bulk_decay, Phase::heavy_tailed,
                 Phase::rank_collapse}) {
    if (to_string(p) == text) return p;
  }
  throw FormatError("unknown phase '" + std::string(text) + "'");
}

double zero_mass_fraction(const Esd& esd) {
  if (esd.eigenvalues.empty()) return 0.0;
  const double cut = kZeroEps * esd.lambda_max();
  const auto n = std::lower_bound(esd.eigenvalues.begin(), esd.eigenvalues.end(), cut) - esd.eigenvalues.begin();
  return static_cast<double>(n) / static_cast<double>(esd.size());
}

SpikeStatistics spike_statistics(const Esd& esd, const MpFit& fit, double edge_floor) {
  SpikeStatistics s;
  s.zero_mass_fraction = zero_mass_fraction(esd);
  const auto& ev = esd.eigenvalues;
  if (ev.empty()) return s;
  const double lp = fit.lambda_plus;
  const double t = lp * (1.0 + edge_margin(esd.size(), edge_floor));
  const auto above_lp = std::upper_bound(ev.begin(), ev.end(), lp);
  const auto above_t = std::upper_bound(ev.begin(), ev.end(), t);
  const auto m = static_cast<double>(ev.size());
  s.spike_count = static_cast<std::size_t>(ev.end() - above_t);
  s.bleed_mass_fraction = static_cast<double>(above_t - above_lp) / m;
  if (s.spike_count > 0 && lp > 0.0) {
    const double smallest_spike = *above_t;
    const double largest_bulk = above_t == ev.begin() ? 0.0 : *(above_t - 1);
    s.spike_gap = (smallest_spike - largest_bulk) / lp;
  }
  return s;
}

PhaseEvidence gather_evidence(const Esd& esd, std::optional<MpFit> mp_fit, std::optional<PlFit> pl_fit,
                              double edge_floor) {
  PhaseEvidence e;
  e.zero_mass_fraction = zero_mass_fraction(esd);
  if (mp_fit && mp_fit->converged) {
    const auto s = spike_statistics(esd, *mp_fit, edge_floor);
    e.spike_count = s.spike_count;
    e.spike_gap = s.spike_gap;
    e.bleed_mass_fraction = s.bleed_mass_fraction;
  }
  e.mp_fit = std::move(mp_fit);
  e.pl_fit = std::move(pl_fit);
  return e;
}

PhaseLabel classify(const PhaseEvidence& ev, const PhaseThresholds& th) {
  PhaseLabel label;
  auto& why = label.rationale;

  if (ev.zero_mass_fraction >= th.zero_mass) {
    label.phase = Phase::rank_collapse;
    why.push_back("rank_collapse: zero-eigenvalue mass " + fmt(ev.zero_mass_fraction) + " >= " + fmt(th.zero_mass));
    return label;
  }
  if (!ev.mp_fit && !ev.pl_fit) throw UnclassifiableError("no MP fit and no power-law fit to classify from");

  if (ev.pl_fit) {
    const auto& pl = *ev.pl_fit;
    const bool steep_enough = pl.alpha <= th.alpha_ht;
    const bool not_exponential = !exponential_preferred(pl);
    const bool beats_mp = !ev.mp_fit || pl.ks_distance < ev.mp_fit->ks_distance;
    if (steep_enough && not_exponential && beats_mp) {
      label.phase = Phase::heavy_tailed;
      why.push_back("heavy_tailed: alpha " + fmt(pl.alpha) + " <= " + fmt(th.alpha_ht) +
                    ", power law not rejected against exponential, " +
                    (ev.mp_fit ? "tail KS " + fmt(pl.ks_distance) + " < MP KS " + fmt(ev.mp_fit->ks_distance)
                               : std::string("no MP fit")));
      return label;
    }
  }

  const bool mp_good = ev.mp_fit && ev.mp_fit->converged && ev.mp_fit->ks_distance <= th.mp_ks;
  if (mp_good) {
    const std::string fit_note = "MP fit converged with KS " + fmt(ev.mp_fit->ks_distance) + " <= " + fmt(th.mp_ks);
    if (ev.spike_count == 0 && ev.bleed_mass_fraction <= th.bleed_mass) {
      label.phase = Phase::random_like;
      why.push_back("random_like: " + fit_note + ", no spikes, bleed mass " + fmt(ev.bleed_mass_fraction) +
                    " <= " + fmt(th.bleed_mass));
      return label;
    }
    if (ev.spike_count >= 1 && ev.spike_gap >= th.spike_gap) {
      label.phase = Phase::bulk_spikes;
      why.push_back("bulk_spikes: " + fit_note + ", " + std::to_string(ev.spike_count) + " spike(s) with gap " +
                    fmt(ev.spike_gap) + " >= " + fmt(th.spike_gap));
      return label;
    }
    if (ev.bleed_mass_fraction > th.bleed_mass && (ev.spike_count == 0 || ev.spike_gap < th.spike_gap)) {
      label.phase = Phase::bleeding_out;
      why.push_back("bleeding_out: " + fit_note + ", bleed mass " + fmt(ev.bleed_mass_fraction) + " > " +
                    fmt(th.bleed_mass) + ", no well-separated spike");
      return label;
    }
  }

  label.phase = Phase::bulk_decay;
  why.push_back("bulk_decay: residual class; no other rule matched");
  why.push_back("note: the edge above lambda+ is not tested for convexity");
  return label;
}

}  // namespace rmtspec
