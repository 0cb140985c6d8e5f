#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "uwblink/channel_grid.hpp"
#include "uwblink/distance_grid.hpp"
#include "uwblink/fibre_model.hpp"
#include "uwblink/gn_integral.hpp"
#include "uwblink/lbfgsb.hpp"
#include "uwblink/raman_power.hpp"
#include "uwblink/units.hpp"

namespace uwblink {

// Dual-polarisation ASE power in one channel for an amplifier that applies
// linear gain `gain` at frequency f, W.
[[nodiscard]] inline double ase_power(double nf_db, double gain, double f, double bch) {
  if (gain < 1.0) throw ConfigError("ase_power: gain below 1 is not an amplifier");
  const double n_sp = 0.5 * db_to_linear(nf_db);
  return 2.0 * n_sp * kPlanck * f * (gain - 1.0) * bch;
}

// Piecewise-linear (in dBm over frequency) launch-power profile, one polyline
// per band. The edges are the optimiser's decision variables.
struct SegmentBand {
  std::string name;
  std::vector<double> edge_freq;  // ascending, Hz
  std::vector<double> edge_dbm;
};

struct SegmentProfile {
  std::vector<SegmentBand> bands;

  [[nodiscard]] std::size_t variable_count() const {
    std::size_t n = 0;
    for (const auto& b : bands) n += b.edge_dbm.size();
    return n;
  }

  [[nodiscard]] std::vector<double> flatten() const {
    std::vector<double> v;
    v.reserve(variable_count());
    for (const auto& b : bands) v.insert(v.end(), b.edge_dbm.begin(), b.edge_dbm.end());
    return v;
  }

  void unflatten(const std::vector<double>& v) {
    if (v.size() != variable_count()) throw ConfigError("profile: variable count mismatch");
    std::size_t k = 0;
    for (auto& b : bands) {
      for (auto& p : b.edge_dbm) p = v[k++];
    }
  }

  void set_all(double dbm) {
    for (auto& b : bands) std::fill(b.edge_dbm.begin(), b.edge_dbm.end(), dbm);
  }
};

// Segment geometry: per band, round(occupied bandwidth / seg_bandwidth)
// segments (at least one), edges equally spaced across the band's occupied
// channels with the band ends always carrying an edge.
[[nodiscard]] inline SegmentProfile make_segment_profile(const ChannelGrid& grid,
                                                         const BandPlan& plan) {
  SegmentProfile prof;
  for (const auto& band : plan.bands) {
    double f_lo = 0.0, f_hi = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid.guard[i]) continue;
      const double lam = freq_to_lambda(grid.freq[i]);
      if (lam < band.lambda_lo || lam >= band.lambda_hi) continue;
      if (count == 0) {
        f_lo = f_hi = grid.freq[i];
      } else {
        f_lo = std::min(f_lo, grid.freq[i]);
        f_hi = std::max(f_hi, grid.freq[i]);
      }
      ++count;
    }
    if (count == 0) continue;
    const double occupied = static_cast<double>(count) * grid.spacing;
    auto segs = static_cast<std::size_t>(std::lround(occupied / band.seg_bandwidth));
    segs = std::max<std::size_t>(segs, 1);
    SegmentBand sb;
    sb.name = band.name;
    sb.edge_dbm.assign(segs + 1, 0.0);
    sb.edge_freq.resize(segs + 1);
    for (std::size_t e = 0; e <= segs; ++e) {
      sb.edge_freq[e] =
          f_lo + (f_hi - f_lo) * static_cast<double>(e) / static_cast<double>(segs);
    }
    prof.bands.push_back(std::move(sb));
  }
  if (prof.bands.empty()) throw ConfigError("profile: no band contains any active channel");
  return prof;
}

// Write the profile into the grid's launch powers (guards stay dark).
inline void apply_profile(ChannelGrid& grid, const SegmentProfile& prof, const BandPlan& plan) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.guard[i]) {
      grid.set_channel_power(i, 0.0);
      continue;
    }
    const double lam = freq_to_lambda(grid.freq[i]);
    const int b = plan.band_of_lambda(lam);
    if (b < 0) throw ConfigError("profile: channel outside every band");
    const SegmentBand* sb = nullptr;
    for (const auto& cand : prof.bands) {
      if (cand.name == plan.bands[static_cast<std::size_t>(b)].name) {
        sb = &cand;
        break;
      }
    }
    if (!sb) throw ConfigError("profile: no segment polyline for band " +
                               plan.bands[static_cast<std::size_t>(b)].name);
    const double f = grid.freq[i];
    double dbm;
    if (f <= sb->edge_freq.front()) {
      dbm = sb->edge_dbm.front();
    } else if (f >= sb->edge_freq.back()) {
      dbm = sb->edge_dbm.back();
    } else {
      const auto it = std::upper_bound(sb->edge_freq.begin(), sb->edge_freq.end(), f);
      const auto j = static_cast<std::size_t>(it - sb->edge_freq.begin());
      const double t = (f - sb->edge_freq[j - 1]) / (sb->edge_freq[j] - sb->edge_freq[j - 1]);
      dbm = sb->edge_dbm[j - 1] + t * (sb->edge_dbm[j] - sb->edge_dbm[j - 1]);
    }
    grid.set_channel_power(i, dbm_to_watt(dbm));
  }
}

struct ChannelReport {
  double freq = 0.0;
  double launch_dbm = 0.0;
  double eta = 0.0;      // 1/W^2
  double p_ase = 0.0;    // W
  double snr_db = 0.0;
  double capacity = 0.0; // bps
  int band = -1;
  bool guard = false;
};

struct LinkReport {
  std::vector<ChannelReport> channels;
  std::vector<double> band_power_dbm;
  std::vector<double> band_capacity;
  double total_power_dbm = 0.0;
  double total_capacity = 0.0;
  double loss_value = 0.0;  // the optimised objective; capacity = -2 bch * this
};

struct LinkConfig {
  GnSolverConfig gn;
  RamanSolveOptions raman;
  double snr_trx_db = 0.0;
  bool use_snr_trx = false;
  bool uniform_mode = false;
  bool freeze_eta = false;  // reuse the noise solve from each phase's start point
  double bound_lo_dbm = -5.0;
  double bound_hi_dbm = 5.0;
  double fd_step_db = 1e-3;
  BoundedLbfgsOptions lbfgs;
  std::vector<GnSolverConfig> phases;  // empty: single phase with `gn`
};

// The launch-power-dependent noise quantities of one evaluation: NLI
// efficiency per channel and the span-end power ratio feeding the amplifier
// gain.
struct LinkNoise {
  std::vector<double> eta;
  std::vector<double> rho_end;
};

[[nodiscard]] inline LinkNoise solve_link_noise(const FibreSpec& fibre, const ChannelGrid& grid,
                                                const LinkConfig& cfg, const GnSolverConfig& gn) {
  DistanceGrid zgrid = build_distance_grid(fibre.length_m, gn.mean_step_density);
  PowerEvolution evo = solve_power_evolution(fibre, grid, zgrid, cfg.raman);
  std::vector<PowerEvolution> spans(static_cast<std::size_t>(fibre.span_count), evo);
  NliResult nli = all_channels_nli(grid, spans, beta_from_dispersion(fibre.dispersion,
                                                                     freq_to_lambda(grid.centre)),
                                   fibre, gn);
  return LinkNoise{std::move(nli.eta), std::move(evo.rho_end)};
}

// Assemble per-channel SNR and Shannon capacity from the grid's current
// launch powers and an already-solved noise state.
[[nodiscard]] inline LinkReport assemble_link_report(const FibreSpec& fibre,
                                                     const ChannelGrid& grid, const BandPlan& plan,
                                                     const LinkConfig& cfg,
                                                     const LinkNoise& noise) {
  LinkReport rep;
  rep.channels.resize(grid.size());
  rep.band_power_dbm.assign(plan.bands.size(), 0.0);
  rep.band_capacity.assign(plan.bands.size(), 0.0);
  std::vector<double> band_power_w(plan.bands.size(), 0.0);
  double total_w = 0.0;
  const double snr_trx = cfg.use_snr_trx ? db_to_linear(cfg.snr_trx_db) : 0.0;

  for (std::size_t i = 0; i < grid.size(); ++i) {
    ChannelReport& c = rep.channels[i];
    c.freq = grid.freq[i];
    c.guard = grid.guard[i] != 0;
    c.band = plan.band_of_lambda(freq_to_lambda(grid.freq[i]));
    if (c.guard || grid.psd[i] <= 0.0) continue;
    const double p = grid.channel_power(i);
    c.launch_dbm = watt_to_dbm(p);
    c.eta = noise.eta[i];
    const double gain = 1.0 / noise.rho_end[i];
    const double nf = c.band >= 0 ? plan.bands[static_cast<std::size_t>(c.band)].nf_db : 5.0;
    c.p_ase = static_cast<double>(fibre.span_count) *
              ase_power(nf, std::max(gain, 1.0), grid.freq[i], grid.bch);
    double denom = c.eta * p * p * p + c.p_ase;
    if (cfg.use_snr_trx) denom += p / snr_trx;
    const double snr = p / denom;
    c.snr_db = linear_to_db(snr);
    c.capacity = 2.0 * grid.bch * std::log2(1.0 + snr);
    rep.loss_value -= std::log2(1.0 + snr);
    rep.total_capacity += c.capacity;
    total_w += p;
    if (c.band >= 0) {
      band_power_w[static_cast<std::size_t>(c.band)] += p;
      rep.band_capacity[static_cast<std::size_t>(c.band)] += c.capacity;
    }
  }
  rep.total_power_dbm = total_w > 0.0 ? watt_to_dbm(total_w) : -300.0;
  for (std::size_t b = 0; b < plan.bands.size(); ++b) {
    rep.band_power_dbm[b] = band_power_w[b] > 0.0 ? watt_to_dbm(band_power_w[b]) : -300.0;
  }
  return rep;
}

// Solve power evolution + NLI for the grid's current launch powers and
// assemble per-channel SNR and Shannon capacity.
[[nodiscard]] inline LinkReport evaluate_link(const FibreSpec& fibre, const ChannelGrid& grid,
                                              const BandPlan& plan, const LinkConfig& cfg,
                                              const GnSolverConfig& gn) {
  return assemble_link_report(fibre, grid, plan, cfg, solve_link_noise(fibre, grid, cfg, gn));
}

struct OptimiseOutcome {
  SegmentProfile profile;
  LinkReport report;
  BoundedLbfgsResult solver;          // last phase
  std::vector<double> phase_objectives;
};

// Launch-power optimisation: minimise the negated sum of per-channel
// log2(1+SNR) over segment-edge powers (or one shared power in uniform mode),
// forward-difference gradients, optional multi-phase solver refinement.
[[nodiscard]] inline OptimiseOutcome optimise_launch_powers(const FibreSpec& fibre,
                                                            const ChannelGrid& grid0,
                                                            const BandPlan& plan,
                                                            const LinkConfig& cfg,
                                                            double initial_dbm = 0.0) {
  SegmentProfile prof = make_segment_profile(grid0, plan);
  prof.set_all(initial_dbm);

  const std::size_t n_vars = cfg.uniform_mode ? 1 : prof.variable_count();
  std::vector<double> x0(n_vars, initial_dbm);
  const std::vector<double> lo(n_vars, cfg.bound_lo_dbm);
  const std::vector<double> hi(n_vars, cfg.bound_hi_dbm);

  std::vector<GnSolverConfig> phases = cfg.phases;
  if (phases.empty()) phases.push_back(cfg.gn);

  OptimiseOutcome out;
  auto to_profile = [&](const std::vector<double>& v) {
    if (cfg.uniform_mode) {
      prof.set_all(v[0]);
    } else {
      prof.unflatten(v);
    }
  };

  BoundedLbfgsResult best;
  for (const GnSolverConfig& phase_gn : phases) {
    // Each cost call normally re-solves power evolution and NLI at the trial
    // powers. With freeze_eta the noise state is solved once where the phase
    // starts and held fixed, trading that coupling for much cheaper calls.
    std::optional<LinkNoise> frozen;
    if (cfg.freeze_eta) {
      to_profile(x0);
      ChannelGrid g = grid0;
      apply_profile(g, prof, plan);
      frozen = solve_link_noise(fibre, g, cfg, phase_gn);
    }
    auto value = [&](const std::vector<double>& v) {
      to_profile(v);
      ChannelGrid g = grid0;
      apply_profile(g, prof, plan);
      if (frozen) return assemble_link_report(fibre, g, plan, cfg, *frozen).loss_value;
      return evaluate_link(fibre, g, plan, cfg, phase_gn).loss_value;
    };
    auto gradient = [&](const std::vector<double>& v, double f0) {
      std::vector<double> g(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        std::vector<double> vp = v;
        vp[i] += cfg.fd_step_db;
        g[i] = (value(vp) - f0) / cfg.fd_step_db;
      }
      return g;
    };
    best = minimize_bounded(value, gradient, x0, lo, hi, cfg.lbfgs);
    out.phase_objectives.push_back(best.f);
    x0 = best.x;
  }

  to_profile(best.x);
  out.profile = prof;
  out.solver = best;
  ChannelGrid g = grid0;
  apply_profile(g, prof, plan);
  // The final report re-solves the noise at the optimum even when the search
  // itself ran frozen, so it always describes the link as operated.
  out.report = evaluate_link(fibre, g, plan, cfg, phases.back());
  return out;
}

}  // namespace uwblink
