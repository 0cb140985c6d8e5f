#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "uwblink/channel_grid.hpp"
#include "uwblink/fibre_model.hpp"
#include "uwblink/parallel.hpp"
#include "uwblink/raman_power.hpp"
#include "uwblink/units.hpp"

namespace uwblink {

struct GnSolverConfig {
  int n_r = 150;                   // samples per axis per quadrant
  double mean_step_density = 1.4;  // distance-grid steps per km
  int workers = 0;                 // 0 = hardware concurrency
  enum class U1Sampling { kLog, kUniform };
  U1Sampling u1_sampling = U1Sampling::kLog;
  double u1_min_ratio = 1e-10;  // smallest log-spaced u1 edge relative to u1_max
  bool simpson_channel_average = false;  // 3-point Simpson across the channel
  bool mirror_q4 = true;  // reuse Q2 for Q4 (exact by f1<->f2 symmetry)
};

struct NliResult {
  std::vector<double> eta;       // 1/W^2 per channel (0 where skipped)
  std::vector<double> nli_psd;   // W/Hz at the channel centre
  std::vector<double> nli_power; // W inside the channel bandwidth
  std::vector<std::array<double, 4>> quadrant;  // per-quadrant integral diagnostics
  std::vector<std::uint8_t> skipped;  // 1 = guard / zero launch PSD
  double elapsed_seconds = 0.0;
};

// Phase mismatch per unit distance between interferers at offsets f1, f2 from
// a channel sitting at offset fi from the expansion point, rad/m. Every
// subexpression is grouped so that swapping f1 and f2 reproduces the exact
// same floating-point value; the quadrant mirror depends on that.
[[nodiscard]] inline double phase_mismatch(double f1, double f2, double fi,
                                           const BetaCoefficients& b) {
  const double quartic =
      (f1 * f1 + f2 * f2) + 1.5 * (f1 * f2) + 3.0 * fi * (f1 + f2) + 3.0 * (fi * fi);
  const double bracket = b.beta2 + kPi * b.beta3 * ((f1 + f2) + 2.0 * fi) +
                         (2.0 * kPi * kPi / 3.0) * b.beta4 * quartic;
  return -4.0 * kPi * kPi * (f1 * f2) * bracket;
}

// One quadrant of the recentred integration domain in hyperbolic coordinates
// u1 = g1 g2, u2 = ln sqrt(g1/g2). g1 is bounded by b1, g2 by b2; the signs
// map (g1, g2) back to interferer offsets (f1, f2) = (s1 g1, s2 g2).
struct QuadrantSpec {
  double b1 = 0.0;
  double b2 = 0.0;
  double s1 = 1.0;
  double s2 = 1.0;
  double u1_max = 0.0;
};

[[nodiscard]] inline QuadrantSpec quadrant_limits(int q, double half_band, double f_offset) {
  if (std::abs(f_offset) > half_band) {
    throw ConfigError("quadrant_limits: channel offset must lie inside the half band");
  }
  const double bm = half_band - f_offset;
  const double bp = half_band + f_offset;
  QuadrantSpec s;
  switch (q) {
    case 1: s = {bm, bm, +1.0, +1.0, 0.0}; break;
    case 2: s = {bp, bm, -1.0, +1.0, 0.0}; break;
    case 3: s = {bp, bp, -1.0, -1.0, 0.0}; break;
    case 4: s = {bm, bp, +1.0, -1.0, 0.0}; break;
    default: throw ConfigError("quadrant_limits: quadrant index must be 1..4");
  }
  s.u1_max = s.b1 * s.b2;
  return s;
}

namespace detail {

struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// Per-span data laid out for the inner distance loop.
struct SpanView {
  const PowerEvolution* evo = nullptr;
  double z_base = 0.0;  // accumulated length of earlier spans
  std::size_t steps = 0;
};

// Interpolation stencil for one frequency: two columns of log rho and the
// half-weights used inside p = exp(0.5 (l1 + l2 + l3) - hl_ch).
struct Stencil {
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  double hw0 = 0.5;
  double hw1 = 0.0;
};

[[nodiscard]] inline Stencil stencil_for(const ChannelGrid& grid, double nu) {
  Stencil s;
  const std::size_t n = grid.size();
  if (n == 1) return s;
  double pos = (nu - grid.freq.front()) / grid.spacing;
  if (pos <= 0.0) return s;
  if (pos >= static_cast<double>(n - 1)) {
    s.i0 = s.i1 = n - 1;
    s.hw0 = 0.5;
    s.hw1 = 0.0;
    return s;
  }
  const auto k = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(k);
  s.i0 = k;
  s.i1 = k + 1;
  s.hw0 = 0.5 * (1.0 - t);
  s.hw1 = 0.5 * t;
  return s;
}

// |sum over spans and steps of p dz sinc(phi dz / 2) e^{j phi z}|^2 with the
// three interferer stencils and the probe's precomputed half-log column.
// Written as the exact per-step integral of e^{j phi z} (difference of edge
// phasors) when the phase advances fast enough; the direct sinc form is kept
// for the nearly phase-matched branch.
[[nodiscard]] inline double kernel_abs2(const std::vector<SpanView>& spans, const Stencil& s1,
                                        const Stencil& s2, const Stencil& s3,
                                        const std::vector<const double*>& probe_half_log,
                                        double phi) {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const SpanView& sv = spans[k];
    const PowerEvolution& evo = *sv.evo;
    const std::size_t nm = sv.steps;
    const double* c1a = evo.log_rho.data() + s1.i0 * nm;
    const double* c1b = evo.log_rho.data() + s1.i1 * nm;
    const double* c2a = evo.log_rho.data() + s2.i0 * nm;
    const double* c2b = evo.log_rho.data() + s2.i1 * nm;
    const double* c3a = evo.log_rho.data() + s3.i0 * nm;
    const double* c3b = evo.log_rho.data() + s3.i1 * nm;
    const double* hl4 = probe_half_log[k];
    const double* edge = evo.grid.edge.data();
    const double* mid = evo.grid.mid.data();
    const double* width = evo.grid.width.data();

    const bool fast = std::abs(phi) * evo.grid.width.back() > 1e-4;
    if (fast) {
      double prev_c = std::cos(phi * (sv.z_base + edge[0]));
      double prev_s = std::sin(phi * (sv.z_base + edge[0]));
      double sre = 0.0, sim = 0.0;
      for (std::size_t m = 0; m < nm; ++m) {
        const double lg = s1.hw0 * c1a[m] + s1.hw1 * c1b[m] + s2.hw0 * c2a[m] +
                          s2.hw1 * c2b[m] + s3.hw0 * c3a[m] + s3.hw1 * c3b[m] - hl4[m];
        const double p = std::exp(lg);
        const double ang = phi * (sv.z_base + edge[m + 1]);
        const double nc = std::cos(ang);
        const double ns = std::sin(ang);
        sre += p * (nc - prev_c);
        sim += p * (ns - prev_s);
        prev_c = nc;
        prev_s = ns;
      }
      // Divide the accumulated phasor differences by j phi.
      re += sim / phi;
      im += -sre / phi;
    } else {
      for (std::size_t m = 0; m < nm; ++m) {
        const double lg = s1.hw0 * c1a[m] + s1.hw1 * c1b[m] + s2.hw0 * c2a[m] +
                          s2.hw1 * c2b[m] + s3.hw0 * c3a[m] + s3.hw1 * c3b[m] - hl4[m];
        const double p = std::exp(lg);
        const double x = 0.5 * phi * width[m];
        const double sinc = std::abs(x) < 1e-8 ? 1.0 : std::sin(x) / x;
        const double ang = phi * (sv.z_base + mid[m]);
        const double w = p * width[m] * sinc;
        re += w * std::cos(ang);
        im += w * std::sin(ang);
      }
    }
  }
  return re * re + im * im;
}

}  // namespace detail

// Reference form of the inner distance kernel, evaluated point by point
// through the public interpolation helpers. The production path must agree
// with this to rounding; a unit test holds the two together.
[[nodiscard]] inline double distance_kernel_abs2_reference(
    const std::vector<PowerEvolution>& spans, double nu1, double nu2, double nu_ch, double phi) {
  std::complex<double> acc{0.0, 0.0};
  double z_base = 0.0;
  for (const auto& evo : spans) {
    for (std::size_t m = 0; m < evo.steps(); ++m) {
      const double p = p_k_factor(evo, nu1, nu2, nu_ch, m);
      const double dz = evo.grid.width[m];
      const double x = 0.5 * phi * dz;
      const double sinc = std::abs(x) < 1e-8 ? 1.0 : std::sin(x) / x;
      const double ang = phi * (z_base + evo.grid.mid[m]);
      acc += p * dz * sinc * std::exp(std::complex<double>(0.0, ang));
    }
    z_base += evo.grid.length;
  }
  return std::norm(acc);
}

// NLI PSD of both polarisations at an absolute probe frequency, by hyperbolic
// Riemann summation of the recentred four-quadrant integral.
[[nodiscard]] inline double nli_psd_at(const ChannelGrid& grid,
                                       const std::vector<PowerEvolution>& spans,
                                       const BetaCoefficients& betas, double gamma_probe,
                                       const GnSolverConfig& cfg, double nu_probe,
                                       std::array<double, 4>* quadrant_diag = nullptr) {
  if (spans.empty()) throw ConfigError("nli_psd_at: need at least one span");
  const int n_r = cfg.n_r;
  if (n_r < 2) throw ConfigError("nli_psd_at: n_r must be >= 2");

  const double f = nu_probe - grid.centre;
  const double b_hull = grid.half_band;

  // Per-span views plus the probe's half-log column (reused for every point).
  std::vector<detail::SpanView> views(spans.size());
  std::vector<std::vector<double>> probe_half_storage(spans.size());
  std::vector<const double*> probe_half(spans.size());
  const detail::Stencil sc = detail::stencil_for(grid, nu_probe);
  double z_base = 0.0;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const PowerEvolution& evo = spans[k];
    if (evo.channels() != grid.size()) {
      throw ConfigError("nli_psd_at: span evolution does not match the channel grid");
    }
    views[k] = {&evo, z_base, evo.steps()};
    z_base += evo.grid.length;
    const std::size_t nm = evo.steps();
    probe_half_storage[k].resize(nm);
    const double* ca = evo.log_rho.data() + sc.i0 * nm;
    const double* cb = evo.log_rho.data() + sc.i1 * nm;
    for (std::size_t m = 0; m < nm; ++m) {
      probe_half_storage[k][m] = sc.hw0 * ca[m] + sc.hw1 * cb[m];
    }
    probe_half[k] = probe_half_storage[k].data();
  }

  std::array<double, 4> quad{0.0, 0.0, 0.0, 0.0};
  const int last_q = cfg.mirror_q4 ? 3 : 4;
  for (int q = 1; q <= last_q; ++q) {
    const QuadrantSpec spec = quadrant_limits(q, b_hull, f);
    if (!(spec.u1_max > 0.0)) continue;  // probe on the hull edge, domain collapsed
    detail::KahanSum acc;
    const double u1_max = spec.u1_max;
    // u1 bin edges: log-spaced by default (the phase-matched ridge hugs
    // u1 = 0), uniform as a config option.
    std::vector<double> edges(static_cast<std::size_t>(n_r) + 1);
    if (cfg.u1_sampling == GnSolverConfig::U1Sampling::kUniform) {
      for (int i = 0; i <= n_r; ++i) {
        edges[static_cast<std::size_t>(i)] = u1_max * static_cast<double>(i) / n_r;
      }
    } else {
      edges[0] = 0.0;
      const double ln_min = std::log(cfg.u1_min_ratio);
      for (int i = 1; i <= n_r; ++i) {
        edges[static_cast<std::size_t>(i)] =
            u1_max * std::exp(ln_min * static_cast<double>(n_r - i) / (n_r - 1));
      }
    }
    for (int i = 0; i < n_r; ++i) {
      const double e0 = edges[static_cast<std::size_t>(i)];
      const double e1 = edges[static_cast<std::size_t>(i) + 1];
      const double du1 = e1 - e0;
      const double u1 = (e0 == 0.0 || cfg.u1_sampling == GnSolverConfig::U1Sampling::kUniform)
                            ? 0.5 * (e0 + e1)
                            : std::sqrt(e0 * e1);
      const double su = std::sqrt(u1);
      const double hi = std::log(spec.b1 / su);
      const double lo = -std::log(spec.b2 / su);
      if (!(hi > lo)) continue;
      const double du2 = (hi - lo) / n_r;
      double row = 0.0;
      for (int j = 0; j < n_r; ++j) {
        const double u2 = lo + (static_cast<double>(j) + 0.5) * du2;
        const double g1 = su * std::exp(u2);
        const double g2 = u1 / g1;
        const double f1 = spec.s1 * g1;
        const double f2 = spec.s2 * g2;
        const double p1 = grid.psd_at(nu_probe + f1);
        if (p1 == 0.0) continue;
        const double p2 = grid.psd_at(nu_probe + f2);
        if (p2 == 0.0) continue;
        const double p3 = grid.psd_at(nu_probe + f1 + f2);
        if (p3 == 0.0) continue;
        const detail::Stencil s1 = detail::stencil_for(grid, nu_probe + f1);
        const detail::Stencil s2 = detail::stencil_for(grid, nu_probe + f2);
        const detail::Stencil s3 = detail::stencil_for(grid, nu_probe + f1 + f2);
        const double phi = phase_mismatch(f1, f2, f, betas);
        row += p1 * p2 * p3 * detail::kernel_abs2(views, s1, s2, s3, probe_half, phi);
      }
      acc.add(row * du1 * du2);
    }
    quad[static_cast<std::size_t>(q - 1)] = acc.sum;
  }
  if (cfg.mirror_q4) quad[3] = quad[1];
  if (quadrant_diag) *quadrant_diag = quad;
  return (16.0 / 27.0) * gamma_probe * gamma_probe * (quad[0] + quad[1] + quad[2] + quad[3]);
}

// eta, NLI PSD and power for one channel.
[[nodiscard]] inline double channel_nli(const ChannelGrid& grid,
                                        const std::vector<PowerEvolution>& spans,
                                        const BetaCoefficients& betas, double gamma_ch,
                                        const GnSolverConfig& cfg, std::size_t ch,
                                        std::array<double, 4>* quadrant_diag = nullptr) {
  const double nu = grid.freq[ch];
  double psd_c = nli_psd_at(grid, spans, betas, gamma_ch, cfg, nu, quadrant_diag);
  if (cfg.simpson_channel_average) {
    const double g_lo = nli_psd_at(grid, spans, betas, gamma_ch, cfg, nu - 0.5 * grid.bch);
    const double g_hi = nli_psd_at(grid, spans, betas, gamma_ch, cfg, nu + 0.5 * grid.bch);
    psd_c = (g_lo + 4.0 * psd_c + g_hi) / 6.0;
  }
  return psd_c;
}

// Full-grid sweep. Channels are distributed over workers in contiguous
// batches; every channel writes only its own slots, so the result is
// bit-identical for any worker count.
[[nodiscard]] inline NliResult all_channels_nli(const ChannelGrid& grid,
                                                const std::vector<PowerEvolution>& spans,
                                                const BetaCoefficients& betas,
                                                const FibreSpec& fibre,
                                                const GnSolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = grid.size();
  NliResult r;
  r.eta.assign(n, 0.0);
  r.nli_psd.assign(n, 0.0);
  r.nli_power.assign(n, 0.0);
  r.quadrant.assign(n, {0.0, 0.0, 0.0, 0.0});
  r.skipped.assign(n, 0);

  parallel_for_batches(cfg.workers, n, [&](std::size_t ch) {
    if (grid.guard[ch] || grid.psd[ch] <= 0.0) {
      r.skipped[ch] = 1;
      return;
    }
    const double gamma_ch = gamma_at(fibre, freq_to_lambda(grid.freq[ch]));
    const double psd = channel_nli(grid, spans, betas, gamma_ch, cfg, ch, &r.quadrant[ch]);
    const double p = grid.channel_power(ch);
    r.nli_psd[ch] = psd;
    r.nli_power[ch] = psd * grid.bch;
    r.eta[ch] = r.nli_power[ch] / (p * p * p);
  });

  r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace uwblink
