#pragma once

// Shared fixtures for the test suite: small channel layouts, simplified
// fibres, and a brute-force Cartesian quadrature that the hyperbolic solver
// is checked against.

#include <cstddef>
#include <vector>

#include "uwblink/channel_grid.hpp"
#include "uwblink/distance_grid.hpp"
#include "uwblink/fibre_model.hpp"
#include "uwblink/gn_integral.hpp"
#include "uwblink/raman_power.hpp"
#include "uwblink/units.hpp"

namespace uwtest {

using namespace uwblink;

// Default fibre with the attenuation table replaced by a flat profile.
inline FibreSpec flat_fibre(double alpha_db_km, double length_m, int spans = 1) {
  FibreSpec f = default_fibre();
  f.attenuation.alpha_db_km.x = {1.0e-6, 2.0e-6};
  f.attenuation.alpha_db_km.y = {alpha_db_km, alpha_db_km};
  f.length_m = length_m;
  f.span_count = spans;
  return f;
}

// Narrow comb for quadrature cross-checks: 12 GHz spacing, 10 GHz channels.
inline ChannelGrid toy_grid(std::size_t n_channels = 3, double power_w = 1e-3,
                            double centre_hz = 193.5e12) {
  ChannelGrid g = make_uniform_grid(n_channels, 12e9, 10e9, centre_hz);
  set_uniform_launch(g, power_w);
  return g;
}

// Midpoint-rule integration of the recentred NLI integral on a plain
// rectangular (f1, f2) grid with n_cells cells per axis. Uses the reference
// distance kernel, so the comparison with the production solver isolates the
// coordinate transform and its Riemann sampling.
inline double cartesian_nli_psd(const ChannelGrid& grid,
                                const std::vector<PowerEvolution>& spans,
                                const BetaCoefficients& betas, double gamma_probe,
                                double nu_probe, int n_cells) {
  const double f = nu_probe - grid.centre;
  const double lo = -(grid.half_band + f);
  const double hi = grid.half_band - f;
  const double d = (hi - lo) / n_cells;
  double total = 0.0;
  for (int i = 0; i < n_cells; ++i) {
    const double f1 = lo + (i + 0.5) * d;
    const double p1 = grid.psd_at(nu_probe + f1);
    if (p1 == 0.0) continue;
    double row = 0.0;
    for (int j = 0; j < n_cells; ++j) {
      const double f2 = lo + (j + 0.5) * d;
      const double p2 = grid.psd_at(nu_probe + f2);
      if (p2 == 0.0) continue;
      const double p3 = grid.psd_at(nu_probe + f1 + f2);
      if (p3 == 0.0) continue;
      const double phi = phase_mismatch(f1, f2, f, betas);
      row += p1 * p2 * p3 *
             distance_kernel_abs2_reference(spans, nu_probe + f1, nu_probe + f2, nu_probe, phi);
    }
    total += row * d * d;
  }
  return (16.0 / 27.0) * gamma_probe * gamma_probe * total;
}

inline double to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace uwtest
