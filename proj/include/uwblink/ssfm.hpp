#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "uwblink/channel_grid.hpp"
#include "uwblink/fft.hpp"
#include "uwblink/fibre_model.hpp"
#include "uwblink/units.hpp"

namespace uwblink {

// Dual-polarisation split-step (Manakov) reference propagator. Deliberately
// direct: one FFT-sized simulation window, adaptive symmetric split steps,
// and a matched-filter receiver that reads the NLI variance off the symbol
// residuals.
struct SsfmConfig {
  std::size_t symbols_per_channel = 1u << 14;
  std::size_t samples_per_symbol = 8;
  double rolloff = 0.01;
  double goal_local_error = 1e-6;
  std::uint64_t rng_seed = 1;
  bool include_isrs = false;
  double fixed_step_m = 0.0;    // > 0: plain symmetric steps of this size
  double initial_step_m = 0.0;  // 0: span length / 1000
  double gamma_override = -1.0; // < 0: fibre gamma at the window centre

  void validate() const {
    if (samples_per_symbol < 2) throw ConfigError("ssfm: need >= 2 samples per symbol");
    if (!(rolloff > 0.0) || rolloff > 1.0) throw ConfigError("ssfm: rolloff must be in (0, 1]");
    if (!(goal_local_error > 0.0)) throw ConfigError("ssfm: goal local error must be > 0");
    if (symbols_per_channel < 2) throw ConfigError("ssfm: need >= 2 symbols");
  }
};

struct FieldState {
  std::vector<std::complex<double>> ex;
  std::vector<std::complex<double>> ey;
  double fs = 0.0;      // sample rate, Hz
  double centre = 0.0;  // absolute frequency of bin 0, Hz
  double z = 0.0;       // distance propagated, m
};

// Transmitted-symbol record the receiver scores against. Symbols are stored
// in units where the two polarisations of one channel sum to the launch
// power.
struct TxRecord {
  std::vector<std::array<std::vector<std::complex<double>>, 2>> symbols;
  std::vector<long> bin_offset;  // channel centre, signed FFT bins
};

struct SsfmSignal {
  FieldState field;
  TxRecord tx;
};

// Root-raised-cosine amplitude response at offset f from the carrier.
[[nodiscard]] inline double rrc_response(double f, double symbol_rate, double rolloff) {
  const double a = std::abs(f);
  const double f1 = 0.5 * (1.0 - rolloff) * symbol_rate;
  const double f2 = 0.5 * (1.0 + rolloff) * symbol_rate;
  if (a <= f1) return 1.0;
  if (a >= f2) return 0.0;
  return std::sqrt(0.5 * (1.0 + std::cos(kPi * (a - f1) / (rolloff * symbol_rate))));
}

namespace detail {

// 53-bit uniform in (0, 1].
[[nodiscard]] inline double uniform_unit(std::mt19937_64& rng) {
  return 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

[[nodiscard]] inline std::complex<double> gaussian_symbol(std::mt19937_64& rng) {
  const double u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  const double r = std::sqrt(-std::log(u1));  // unit-variance complex Gaussian
  const double th = 2.0 * kPi * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

[[nodiscard]] inline std::uint64_t stream_seed(std::uint64_t seed, std::size_t ch, int pol) {
  return seed * 0x9E3779B97F4A7C15ull + (2 * static_cast<std::uint64_t>(ch) + static_cast<std::uint64_t>(pol) + 1);
}

}  // namespace detail

// Frequency-multiplexed RRC waveform with independent Gaussian symbols per
// channel and polarisation. Channel offsets snap to the FFT bin raster;
// each channel's field power is normalised to its launch power exactly.
[[nodiscard]] inline SsfmSignal generate_waveform(const ChannelGrid& grid, const SsfmConfig& cfg) {
  cfg.validate();
  grid.validate();
  const std::size_t n_sym = cfg.symbols_per_channel;
  const std::size_t n = n_sym * cfg.samples_per_symbol;
  const double rs = grid.bch;
  const double fs = rs * static_cast<double>(cfg.samples_per_symbol);
  const double df = fs / static_cast<double>(n);

  SsfmSignal sig;
  sig.field.fs = fs;
  sig.field.centre = grid.centre;
  sig.field.ex.assign(n, {0.0, 0.0});
  sig.field.ey.assign(n, {0.0, 0.0});
  sig.tx.symbols.resize(grid.size());
  sig.tx.bin_offset.assign(grid.size(), 0);

  const auto span = static_cast<long>(std::floor(0.5 * (1.0 + cfg.rolloff) * rs / df));
  FftPlan sym_plan(n_sym);

  std::vector<std::complex<double>> spec_x(n, {0.0, 0.0});
  std::vector<std::complex<double>> spec_y(n, {0.0, 0.0});
  std::vector<std::complex<double>> a(n_sym);

  for (std::size_t ch = 0; ch < grid.size(); ++ch) {
    const double offset = grid.offset(ch);
    const long n_off = std::lround(offset / df);
    sig.tx.bin_offset[ch] = n_off;
    if (std::abs(n_off) * df + 0.5 * (1.0 + cfg.rolloff) * rs > 0.5 * fs) {
      throw ConfigError("ssfm: channel falls outside the simulated bandwidth");
    }
    const double p_ch = grid.channel_power(ch);
    for (int pol = 0; pol < 2; ++pol) {
      auto& rec = sig.tx.symbols[ch][static_cast<std::size_t>(pol)];
      rec.assign(n_sym, {0.0, 0.0});
      if (grid.guard[ch] || p_ch <= 0.0) continue;
      std::mt19937_64 rng(detail::stream_seed(cfg.rng_seed, ch, pol));
      double ms = 0.0;
      for (std::size_t k = 0; k < n_sym; ++k) {
        a[k] = detail::gaussian_symbol(rng);
        ms += std::norm(a[k]);
      }
      ms /= static_cast<double>(n_sym);
      const double sym_scale = std::sqrt(0.5 * p_ch / ms);
      for (std::size_t k = 0; k < n_sym; ++k) rec[k] = a[k] * sym_scale;

      sym_plan.forward(a);
      auto& spec = pol == 0 ? spec_x : spec_y;
      // Assemble the channel's shaped spectrum, then scale it so the field
      // carries exactly p_ch/2 in this polarisation.
      double energy = 0.0;
      for (long j = -span; j <= span; ++j) {
        const double h = rrc_response(static_cast<double>(j) * df, rs, cfg.rolloff);
        if (h == 0.0) continue;
        const auto src = static_cast<std::size_t>(((j % static_cast<long>(n_sym)) + static_cast<long>(n_sym)) % static_cast<long>(n_sym));
        energy += std::norm(a[src]) * h * h;
      }
      if (!(energy > 0.0)) throw SolverError("ssfm: degenerate channel spectrum");
      const double scale = static_cast<double>(n) * std::sqrt(0.5 * p_ch / energy);
      for (long j = -span; j <= span; ++j) {
        const double h = rrc_response(static_cast<double>(j) * df, rs, cfg.rolloff);
        if (h == 0.0) continue;
        const auto src = static_cast<std::size_t>(((j % static_cast<long>(n_sym)) + static_cast<long>(n_sym)) % static_cast<long>(n_sym));
        const auto dst = static_cast<std::size_t>(((n_off + j) % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n));
        spec[dst] += a[src] * (h * scale);
      }
    }
  }

  FftPlan plan(n);
  plan.inverse(spec_x);
  plan.inverse(spec_y);
  sig.field.ex = std::move(spec_x);
  sig.field.ey = std::move(spec_y);
  return sig;
}

// Field power inside one channel's RRC band, W.
[[nodiscard]] inline double measured_channel_power(const FieldState& state, const ChannelGrid& grid,
                                                   std::size_t ch, double rolloff = 0.01) {
  const std::size_t n = state.ex.size();
  FftPlan plan(n);
  std::vector<std::complex<double>> sx = state.ex;
  std::vector<std::complex<double>> sy = state.ey;
  plan.forward(sx);
  plan.forward(sy);
  const double rs = grid.bch;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = bin_frequency(k, n, state.fs);
    if (std::abs(f - grid.offset(ch)) <= 0.5 * (1.0 + rolloff) * rs) {
      acc += std::norm(sx[k]) + std::norm(sy[k]);
    }
  }
  return acc / (static_cast<double>(n) * static_cast<double>(n));
}

namespace detail {

struct SsfmOperators {
  std::vector<double> phase_rate;  // rad/m per bin (linear step multiplies e^{+j r h})
  std::vector<double> loss_rate;   // 1/m amplitude decay per bin
  double gamma_eff = 0.0;          // 8/9 gamma
  double isrs_slope = 0.0;         // gain slope, (W m Hz)^-1
};

[[nodiscard]] inline SsfmOperators build_operators(const FieldState& state, const FibreSpec& fibre,
                                                   const SsfmConfig& cfg) {
  const std::size_t n = state.ex.size();
  const double lambda_c = freq_to_lambda(state.centre);
  const BetaCoefficients b = beta_from_dispersion(fibre.dispersion, lambda_c);
  SsfmOperators ops;
  ops.phase_rate.resize(n);
  ops.loss_rate.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = bin_frequency(k, n, state.fs);
    const double w = 2.0 * kPi * f;
    ops.phase_rate[k] = -(0.5 * b.beta2 * w * w + b.beta3 * w * w * w / 6.0 +
                          b.beta4 * w * w * w * w / 24.0);
    ops.loss_rate[k] = 0.5 * attenuation_at(fibre, freq_to_lambda(state.centre + f));
  }
  const double g = cfg.gamma_override >= 0.0 ? cfg.gamma_override : gamma_at(fibre, lambda_c);
  ops.gamma_eff = (8.0 / 9.0) * g;
  if (cfg.include_isrs) {
    const double probe = 1e12;
    ops.isrs_slope = raman_gain_between(fibre.raman, probe, aeff_at(fibre, lambda_c)) / probe;
  }
  return ops;
}

inline void linear_step(std::vector<std::complex<double>>& sx, std::vector<std::complex<double>>& sy,
                        const SsfmOperators& ops, double h) {
  const std::size_t n = sx.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double amp = std::exp(-ops.loss_rate[k] * h);
    const double ph = ops.phase_rate[k] * h;
    const std::complex<double> m{amp * std::cos(ph), amp * std::sin(ph)};
    sx[k] *= m;
    sy[k] *= m;
  }
}

inline void kerr_step(std::vector<std::complex<double>>& ex, std::vector<std::complex<double>>& ey,
                      double gamma_eff, double h) {
  const std::size_t n = ex.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double p = std::norm(ex[k]) + std::norm(ey[k]);
    const double ph = -gamma_eff * p * h;
    const std::complex<double> m{std::cos(ph), std::sin(ph)};
    ex[k] *= m;
    ey[k] *= m;
  }
}

// One symmetric step D(h/2) N(h) D(h/2), in place, time domain in/out.
inline void symmetric_step(std::vector<std::complex<double>>& ex,
                           std::vector<std::complex<double>>& ey, const FftPlan& plan,
                           const SsfmOperators& ops, double h) {
  plan.forward(ex);
  plan.forward(ey);
  linear_step(ex, ey, ops, 0.5 * h);
  plan.inverse(ex);
  plan.inverse(ey);
  kerr_step(ex, ey, ops.gamma_eff, h);
  plan.forward(ex);
  plan.forward(ey);
  linear_step(ex, ey, ops, 0.5 * h);
  plan.inverse(ex);
  plan.inverse(ey);
}

[[nodiscard]] inline double field_norm2(const std::vector<std::complex<double>>& ex,
                                        const std::vector<std::complex<double>>& ey) {
  double s = 0.0;
  for (const auto& v : ex) s += std::norm(v);
  for (const auto& v : ey) s += std::norm(v);
  return s;
}

}  // namespace detail

// Propagate one span. Adaptive mode advances with coarse/fine step doubling
// and the local-error controller; fixed-step mode takes plain symmetric
// steps (used by the convergence-slope and energy checks).
[[nodiscard]] inline FieldState propagate(FieldState state, const FibreSpec& fibre,
                                          const SsfmConfig& cfg) {
  cfg.validate();
  const std::size_t n = state.ex.size();
  if (n == 0 || state.ey.size() != n) throw ConfigError("ssfm: empty or mismatched field");
  const double span_len = fibre.length_m;
  const detail::SsfmOperators ops = detail::build_operators(state, fibre, cfg);
  FftPlan plan(n);

  auto apply_isrs = [&](double h) {
    if (!cfg.include_isrs || ops.isrs_slope == 0.0) return;
    double p_tot = 0.0, f_cent = 0.0;
    plan.forward(state.ex);
    plan.forward(state.ey);
    for (std::size_t k = 0; k < n; ++k) {
      const double pk = std::norm(state.ex[k]) + std::norm(state.ey[k]);
      p_tot += pk;
      f_cent += pk * bin_frequency(k, n, state.fs);
    }
    if (p_tot > 0.0) {
      f_cent /= p_tot;
      p_tot /= static_cast<double>(n) * static_cast<double>(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double f = bin_frequency(k, n, state.fs);
        const double g = ops.isrs_slope * p_tot * (f_cent - f);  // power gain rate
        const double amp = std::exp(0.5 * g * h);
        state.ex[k] *= amp;
        state.ey[k] *= amp;
      }
    }
    plan.inverse(state.ex);
    plan.inverse(state.ey);
  };

  if (cfg.fixed_step_m > 0.0) {
    double z = 0.0;
    while (z < span_len - 1e-9) {
      const double h = std::min(cfg.fixed_step_m, span_len - z);
      detail::symmetric_step(state.ex, state.ey, plan, ops, h);
      apply_isrs(h);
      z += h;
    }
    state.z += span_len;
    return state;
  }

  double z = 0.0;
  double h = cfg.initial_step_m > 0.0 ? cfg.initial_step_m : span_len / 1000.0;
  std::size_t steps = 0;
  std::vector<std::complex<double>> cx, cy, fx, fy;
  while (z < span_len - 1e-9) {
    if (++steps > 200000) throw SolverError("ssfm: step budget exhausted");
    h = std::min(h, span_len - z);
    cx = state.ex;
    cy = state.ey;
    detail::symmetric_step(cx, cy, plan, ops, h);
    fx = state.ex;
    fy = state.ey;
    detail::symmetric_step(fx, fy, plan, ops, 0.5 * h);
    detail::symmetric_step(fx, fy, plan, ops, 0.5 * h);

    double diff2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      diff2 += std::norm(fx[k] - cx[k]) + std::norm(fy[k] - cy[k]);
    }
    const double ref2 = detail::field_norm2(fx, fy);
    if (!std::isfinite(diff2) || !std::isfinite(ref2) || ref2 == 0.0) {
      throw SolverError("ssfm: field became non-finite");
    }
    const double delta = std::sqrt(diff2 / ref2);
    if (delta > 2.0 * cfg.goal_local_error) {
      h *= 0.5;
      if (h < 1e-3) throw SolverError("ssfm: step underflow");
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      state.ex[k] = (4.0 * fx[k] - cx[k]) / 3.0;
      state.ey[k] = (4.0 * fy[k] - cy[k]) / 3.0;
    }
    apply_isrs(h);
    z += h;
    const double grow = delta > 0.0
                            ? std::min(2.0, std::max(0.5, 0.9 * std::cbrt(cfg.goal_local_error / delta)))
                            : 2.0;
    h *= grow;
  }
  state.z += span_len;
  return state;
}

// Per-channel NLI coefficient from the received field: ideal dispersion
// compensation, matched RRC filter, symbol-rate decimation, least-squares
// scaling against the transmitted symbols, residual variance over both
// polarisations divided by launch power cubed. Guards and dark channels
// report 0.
[[nodiscard]] inline std::vector<double> extract_eta(const FieldState& rx, const TxRecord& tx,
                                                     const ChannelGrid& grid, const SsfmConfig& cfg,
                                                     const FibreSpec& fibre) {
  if (cfg.symbols_per_channel < 4096) {
    throw ConfigError("ssfm: need >= 4096 symbols for a usable NLI variance");
  }
  const std::size_t n = rx.ex.size();
  const std::size_t n_sym = cfg.symbols_per_channel;
  const double rs = grid.bch;
  const double df = rx.fs / static_cast<double>(n);
  const auto span = static_cast<long>(std::floor(0.5 * (1.0 + cfg.rolloff) * rs / df));

  const detail::SsfmOperators ops = detail::build_operators(rx, fibre, cfg);
  FftPlan plan(n);
  FftPlan sym_plan(n_sym);
  std::vector<std::complex<double>> sx = rx.ex;
  std::vector<std::complex<double>> sy = rx.ey;
  plan.forward(sx);
  plan.forward(sy);
  // Undo the accumulated linear phase; loss and ISRS tilt are absorbed by
  // the per-channel least-squares scale.
  for (std::size_t k = 0; k < n; ++k) {
    const double ph = -ops.phase_rate[k] * rx.z;
    const std::complex<double> m{std::cos(ph), std::sin(ph)};
    sx[k] *= m;
    sy[k] *= m;
  }

  std::vector<double> eta(grid.size(), 0.0);
  std::vector<std::complex<double>> folded(n_sym);
  for (std::size_t ch = 0; ch < grid.size(); ++ch) {
    const double p_ch = grid.channel_power(ch);
    if (grid.guard[ch] || p_ch <= 0.0) continue;
    double sigma2 = 0.0;
    for (int pol = 0; pol < 2; ++pol) {
      const auto& spec = pol == 0 ? sx : sy;
      std::fill(folded.begin(), folded.end(), std::complex<double>{0.0, 0.0});
      for (long j = -span; j <= span; ++j) {
        const double h = rrc_response(static_cast<double>(j) * df, rs, cfg.rolloff);
        if (h == 0.0) continue;
        const auto src = static_cast<std::size_t>(
            ((tx.bin_offset[ch] + j) % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n));
        const auto dst = static_cast<std::size_t>(((j % static_cast<long>(n_sym)) + static_cast<long>(n_sym)) % static_cast<long>(n_sym));
        folded[dst] += spec[src] * h;
      }
      sym_plan.inverse(folded);
      const auto& ref = tx.symbols[ch][static_cast<std::size_t>(pol)];
      std::complex<double> num{0.0, 0.0};
      double den = 0.0;
      for (std::size_t k = 0; k < n_sym; ++k) {
        num += folded[k] * std::conj(ref[k]);
        den += std::norm(ref[k]);
      }
      if (!(den > 0.0)) throw SolverError("ssfm: reference symbols are empty");
      const std::complex<double> c = num / den;
      if (std::abs(c) == 0.0) throw SolverError("ssfm: channel vanished in propagation");
      double res = 0.0;
      for (std::size_t k = 0; k < n_sym; ++k) {
        res += std::norm(folded[k] / c - ref[k]);
      }
      sigma2 += res / static_cast<double>(n_sym);
    }
    eta[ch] = sigma2 / (p_ch * p_ch * p_ch);
  }
  return eta;
}

}  // namespace uwblink
