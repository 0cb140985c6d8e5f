#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "uwblink/channel_grid.hpp"
#include "uwblink/distance_grid.hpp"
#include "uwblink/fibre_model.hpp"
#include "uwblink/rk45.hpp"
#include "uwblink/units.hpp"

namespace uwblink {

// Normalised per-channel power along a span: rho(z, f_i) = P_i(z) / P_i(0),
// sampled at the distance-grid midpoints plus the span end. Guard channels
// (zero launch) are integrated as probes, so rho is defined for every grid
// slot and frequency interpolation across guards stays smooth.
struct PowerEvolution {
  DistanceGrid grid;
  std::vector<double> freq;     // channel centre frequencies, Hz
  std::vector<double> launch;   // launch power per channel, W
  std::vector<double> log_rho;  // [channel][step] column-major: ch * steps + m
  std::vector<double> rho_end;  // rho at z = L per channel
  double spacing = 0.0;

  [[nodiscard]] std::size_t channels() const { return freq.size(); }
  [[nodiscard]] std::size_t steps() const { return grid.steps(); }

  [[nodiscard]] double rho(std::size_t ch, std::size_t m) const {
    return std::exp(log_rho[ch * steps() + m]);
  }

  [[nodiscard]] const double* log_rho_column(std::size_t ch) const {
    return log_rho.data() + ch * steps();
  }
};

struct RamanSolveOptions {
  bool include_raman = true;
  double rtol = 1e-9;
  double atol = 1e-16;
};

// Integrates d rho_i / dz = rho_i (-alpha_i + sum_j M_ij P0_j rho_j).
// The pair coupling uses the triangular gain curve rescaled by the effective
// area at the lower-frequency (amplified) member, applied symmetrically to
// both members so that with alpha = 0 the photon flux sum P_i / f_i is
// conserved exactly. The higher-frequency member is depleted with the plain
// coefficient; the lower-frequency member gains with the photon-energy ratio
// f_lo / f_hi.
[[nodiscard]] inline PowerEvolution solve_power_evolution(const FibreSpec& fibre,
                                                          const ChannelGrid& grid,
                                                          const DistanceGrid& zgrid,
                                                          const RamanSolveOptions& opt = {}) {
  grid.validate();
  const std::size_t n = grid.size();
  const std::size_t nm = zgrid.steps();

  PowerEvolution evo;
  evo.grid = zgrid;
  evo.freq = grid.freq;
  evo.spacing = grid.spacing;
  evo.launch.resize(n);
  for (std::size_t i = 0; i < n; ++i) evo.launch[i] = grid.channel_power(i);

  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] = attenuation_at(fibre, freq_to_lambda(grid.freq[i]));
  }

  // M_ij premultiplied by the launch power of channel j, so the RHS is a
  // plain matrix-vector product in rho.
  std::vector<double> m;
  if (opt.include_raman) {
    m.assign(n * n, 0.0);
    for (std::size_t lo = 0; lo < n; ++lo) {
      const double aeff_lo = aeff_at(fibre, freq_to_lambda(grid.freq[lo]));
      for (std::size_t hi = lo + 1; hi < n; ++hi) {
        const double g =
            raman_gain_between(fibre.raman, grid.freq[hi] - grid.freq[lo], aeff_lo);
        if (g == 0.0) continue;
        const double ratio = grid.freq[lo] / grid.freq[hi];
        m[lo * n + hi] = ratio * g * evo.launch[hi];  // gain on the low channel
        m[hi * n + lo] = -g * evo.launch[lo];         // depletion of the high channel
      }
    }
  }

  OdeRhs rhs = [&](double /*z*/, const std::vector<double>& rho, std::vector<double>& drho) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = -alpha[i];
      if (!m.empty()) {
        const double* row = m.data() + i * n;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * rho[j];
        acc += s;
      }
      drho[i] = rho[i] * acc;
    }
  };

  Rk45Options rkopt;
  rkopt.rtol = opt.rtol;
  rkopt.atol = opt.atol;
  Rk45 solver(rhs, rkopt);

  std::vector<double> rho(n, 1.0);
  evo.log_rho.resize(n * nm);
  double z = 0.0;
  for (std::size_t s = 0; s < nm; ++s) {
    solver.integrate(z, zgrid.mid[s], rho);
    z = zgrid.mid[s];
    for (std::size_t i = 0; i < n; ++i) {
      if (!(rho[i] > 0.0)) throw SolverError("power evolution: non-positive rho");
      evo.log_rho[i * nm + s] = std::log(rho[i]);
    }
  }
  solver.integrate(z, zgrid.length, rho);
  evo.rho_end = rho;
  return evo;
}

// log rho at an arbitrary in-hull frequency: linear interpolation between the
// two nearest channel columns (constant within the half-spacing edge margin).
struct RhoInterpWeights {
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  double w0 = 1.0;
  double w1 = 0.0;
};

[[nodiscard]] inline RhoInterpWeights rho_weights(const PowerEvolution& evo, double nu) {
  const std::size_t n = evo.channels();
  const double hull_lo = evo.freq.front() - 0.5 * evo.spacing;
  const double hull_hi = evo.freq.back() + 0.5 * evo.spacing;
  if (nu < hull_lo - 1e-3 || nu > hull_hi + 1e-3) {
    throw ConfigError("rho interpolation outside the channel hull");
  }
  RhoInterpWeights w;
  if (n == 1 || nu <= evo.freq.front()) return w;
  if (nu >= evo.freq.back()) {
    w.i0 = w.i1 = n - 1;
    return w;
  }
  const double pos = (nu - evo.freq.front()) / evo.spacing;
  const auto k = static_cast<std::size_t>(pos);
  w.i0 = k;
  w.i1 = k + 1;
  w.w1 = pos - static_cast<double>(k);
  w.w0 = 1.0 - w.w1;
  return w;
}

[[nodiscard]] inline double log_rho_at(const PowerEvolution& evo, double nu, std::size_t m) {
  const RhoInterpWeights w = rho_weights(evo, nu);
  const std::size_t nm = evo.steps();
  return w.w0 * evo.log_rho[w.i0 * nm + m] + w.w1 * evo.log_rho[w.i1 * nm + m];
}

// Normalised four-wave coupling factor sqrt(rho1 rho2 rho3 / rho_ch) at
// distance-step m, with rho3 at nu1 + nu2 - nu_ch.
[[nodiscard]] inline double p_k_factor(const PowerEvolution& evo, double nu1, double nu2,
                                       double nu_ch, std::size_t m) {
  const double l1 = log_rho_at(evo, nu1, m);
  const double l2 = log_rho_at(evo, nu2, m);
  const double l3 = log_rho_at(evo, nu1 + nu2 - nu_ch, m);
  const double l4 = log_rho_at(evo, nu_ch, m);
  return std::exp(0.5 * (l1 + l2 + l3 - l4));
}

}  // namespace uwblink
