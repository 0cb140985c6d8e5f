#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "uwblink/units.hpp"

namespace uwblink {

// Two-column table with linear interpolation, the storage form for all
// wavelength-dependent fibre quantities. Queries outside the sampled range
// clamp to the end values; the physical tables cover the full supported band
// so clamping only matters for slightly out-of-band probes (e.g. simulation
// guard bins).
struct TabulatedProfile {
  std::vector<double> x;
  std::vector<double> y;

  void validate(const std::string& name) const {
    if (x.size() != y.size() || x.size() < 2) {
      throw ConfigError(name + ": table needs at least two (x, y) rows");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1])) {
        throw ConfigError(name + ": table x values must be strictly increasing");
      }
    }
  }

  [[nodiscard]] double at(double xq) const {
    if (xq <= x.front()) return y.front();
    if (xq >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + t * (y[i] - y[i - 1]);
  }
};

// Polynomial description of D(lambda) about a reference wavelength:
//   D(l) = d + s (l - lambda_c) + 0.5 sdot (l - lambda_c)^2
// All SI: d in s/m^2, s in s/m^3, sdot in s/m^4.
struct DispersionFit {
  double lambda_c = 0.0;
  double d = 0.0;
  double s = 0.0;
  double sdot = 0.0;
  int order = 2;  // 1 = linear (sdot ignored), 2 = quadratic
};

struct BetaCoefficients {
  double beta2 = 0.0;  // s^2/m
  double beta3 = 0.0;  // s^3/m
  double beta4 = 0.0;  // s^4/m
};

[[nodiscard]] inline double dispersion_at(const DispersionFit& fit, double lambda_m) {
  const double dl = lambda_m - fit.lambda_c;
  double d = fit.d + fit.s * dl;
  if (fit.order >= 2) d += 0.5 * fit.sdot * dl * dl;
  return d;
}

[[nodiscard]] inline double dispersion_slope_at(const DispersionFit& fit, double lambda_m) {
  double s = fit.s;
  if (fit.order >= 2) s += fit.sdot * (lambda_m - fit.lambda_c);
  return s;
}

// Converts the local (D, S, Sdot) at `lambda_m` into frequency-domain Taylor
// coefficients of the propagation constant at that wavelength.
[[nodiscard]] inline BetaCoefficients beta_from_dispersion(const DispersionFit& fit,
                                                           double lambda_m) {
  if (!(lambda_m > 0.0)) throw ConfigError("beta_from_dispersion: wavelength must be > 0");
  const double d = dispersion_at(fit, lambda_m);
  const double s = dispersion_slope_at(fit, lambda_m);
  const double sd = fit.order >= 2 ? fit.sdot : 0.0;
  const double tp = 2.0 * kPi * kSpeedOfLight;
  const double l = lambda_m;
  BetaCoefficients b;
  b.beta2 = -d * l * l / tp;
  b.beta3 = l * l * l / (tp * tp) * (2.0 * d + s * l);
  b.beta4 = -l * l * l * l / (tp * tp * tp) * (6.0 * d + 6.0 * s * l + sd * l * l);
  return b;
}

// Least-squares fit of a tabulated D(lambda) by a polynomial of the given
// order about lambda_c. Order 1 or 2.
[[nodiscard]] inline DispersionFit fit_dispersion(const TabulatedProfile& d_table,
                                                  double lambda_c, int order) {
  d_table.validate("dispersion table");
  if (order != 1 && order != 2) throw ConfigError("fit_dispersion: order must be 1 or 2");
  const std::size_t n = d_table.x.size();
  const int m = order + 1;
  // Normal equations on (1, dl, dl^2/2); tiny system, solved directly.
  std::array<std::array<double, 3>, 3> a{};
  std::array<double, 3> rhs{};
  for (std::size_t k = 0; k < n; ++k) {
    const double dl = d_table.x[k] - lambda_c;
    const std::array<double, 3> phi = {1.0, dl, 0.5 * dl * dl};
    for (int i = 0; i < m; ++i) {
      rhs[static_cast<std::size_t>(i)] += phi[static_cast<std::size_t>(i)] * d_table.y[k];
      for (int j = 0; j < m; ++j) {
        a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)];
      }
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r) {
      if (std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::abs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)])) {
        piv = r;
      }
    }
    std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(piv)]);
    std::swap(rhs[static_cast<std::size_t>(col)], rhs[static_cast<std::size_t>(piv)]);
    const double diag = a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
    if (std::abs(diag) < 1e-300) throw SolverError("fit_dispersion: singular normal equations");
    for (int r = col + 1; r < m; ++r) {
      const double f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] / diag;
      for (int c2 = col; c2 < m; ++c2) {
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c2)] -=
            f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c2)];
      }
      rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
    }
  }
  std::array<double, 3> sol{};
  for (int r = m - 1; r >= 0; --r) {
    double acc = rhs[static_cast<std::size_t>(r)];
    for (int c2 = r + 1; c2 < m; ++c2) {
      acc -= a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c2)] *
             sol[static_cast<std::size_t>(c2)];
    }
    acc /= a[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
    sol[static_cast<std::size_t>(r)] = acc;
  }
  DispersionFit fit;
  fit.lambda_c = lambda_c;
  fit.d = sol[0];
  fit.s = sol[1];
  fit.sdot = order >= 2 ? sol[2] : 0.0;
  fit.order = order;
  return fit;
}

// Root of the fitted D(lambda) inside the supported search window.
[[nodiscard]] inline double zero_dispersion_wavelength(const DispersionFit& fit,
                                                       double lambda_lo = 1.0e-6,
                                                       double lambda_hi = 2.0e-6) {
  std::vector<double> roots;
  if (fit.order <= 1 || fit.sdot == 0.0) {
    if (fit.s == 0.0) throw ConfigError("zero_dispersion_wavelength: fit never crosses zero");
    roots.push_back(fit.lambda_c - fit.d / fit.s);
  } else {
    const double a = 0.5 * fit.sdot;
    const double disc = fit.s * fit.s - 4.0 * a * fit.d;
    if (disc < 0.0) throw ConfigError("zero_dispersion_wavelength: fit never crosses zero");
    const double sq = std::sqrt(disc);
    roots.push_back(fit.lambda_c + (-fit.s + sq) / (2.0 * a));
    roots.push_back(fit.lambda_c + (-fit.s - sq) / (2.0 * a));
  }
  std::sort(roots.begin(), roots.end());
  for (double r : roots) {
    if (r >= lambda_lo && r <= lambda_hi) return r;
  }
  throw ConfigError("zero_dispersion_wavelength: no root inside the search window");
}

// Root of the tabulated D(lambda) itself (sign change + linear interpolation).
[[nodiscard]] inline double zero_dispersion_of_table(const TabulatedProfile& d_table) {
  d_table.validate("dispersion table");
  for (std::size_t i = 1; i < d_table.x.size(); ++i) {
    const double y0 = d_table.y[i - 1], y1 = d_table.y[i];
    if (y0 == 0.0) return d_table.x[i - 1];
    if (y0 * y1 < 0.0) {
      const double t = y0 / (y0 - y1);
      return d_table.x[i - 1] + t * (d_table.x[i] - d_table.x[i - 1]);
    }
  }
  if (d_table.y.back() == 0.0) return d_table.x.back();
  throw ConfigError("zero_dispersion_of_table: table never crosses zero");
}

struct AttenuationProfile {
  TabulatedProfile alpha_db_km;  // x = wavelength m, y = dB/km

  // Power attenuation coefficient in 1/m.
  [[nodiscard]] double at(double lambda_m) const {
    return db_per_km_to_per_m(alpha_db_km.at(lambda_m));
  }
};

struct NonlinearProfile {
  TabulatedProfile aeff;   // x = wavelength m, y = m^2, strictly increasing y
  double n2_intercept = 0.0;  // m^2/W at lambda_ref
  double n2_slope = 0.0;      // m^2/W per m of wavelength
  double lambda_ref = 0.0;
  double n2_scale = 1.0;      // calibration multiplier

  [[nodiscard]] double n2_at(double lambda_m) const {
    return n2_scale * (n2_intercept + n2_slope * (lambda_m - lambda_ref));
  }
};

struct RamanGainCurve {
  TabulatedProfile gain;  // x = pump-signal frequency separation Hz, y = 1/(W m)
  double aeff_ref = 80e-12;  // effective area the curve is normalised to, m^2
};

// Gain coefficient between a pump/signal pair, rescaled from the curve's
// reference effective area to the area at the signal wavelength. Direction
// and photon-energy bookkeeping are the caller's business.
[[nodiscard]] inline double raman_gain_between(const RamanGainCurve& curve, double df_hz,
                                               double aeff_signal) {
  if (!(aeff_signal > 0.0)) throw ConfigError("raman_gain_between: effective area must be > 0");
  const double df = std::abs(df_hz);
  if (df >= curve.gain.x.back()) return 0.0;
  return curve.gain.at(df) * curve.aeff_ref / aeff_signal;
}

struct FibreSpec {
  DispersionFit dispersion;     // coefficients used by the NLI solvers
  TabulatedProfile d_table;     // D(lambda) used for zero-dispersion queries
  AttenuationProfile attenuation;
  NonlinearProfile nonlinear;
  RamanGainCurve raman;
  double length_m = 80e3;
  int span_count = 1;

  void validate() const {
    d_table.validate("d_table");
    attenuation.alpha_db_km.validate("attenuation");
    nonlinear.aeff.validate("aeff");
    raman.gain.validate("raman gain");
    if (!(length_m > 0.0)) throw ConfigError("fibre length must be > 0");
    if (span_count < 1) throw ConfigError("span count must be >= 1");
    for (std::size_t i = 1; i < nonlinear.aeff.y.size(); ++i) {
      if (!(nonlinear.aeff.y[i] > nonlinear.aeff.y[i - 1])) {
        throw ConfigError("aeff table must be strictly increasing across the band");
      }
    }
    for (double a : attenuation.alpha_db_km.y) {
      if (!(a >= 0.0)) throw ConfigError("attenuation must be non-negative everywhere");
    }
  }
};

[[nodiscard]] inline double attenuation_at(const FibreSpec& fibre, double lambda_m) {
  return fibre.attenuation.at(lambda_m);
}

[[nodiscard]] inline double aeff_at(const FibreSpec& fibre, double lambda_m) {
  return fibre.nonlinear.aeff.at(lambda_m);
}

[[nodiscard]] inline double gamma_at(const FibreSpec& fibre, double lambda_m) {
  const double n2 = fibre.nonlinear.n2_at(lambda_m);
  return 2.0 * kPi * n2 / (lambda_m * aeff_at(fibre, lambda_m));
}

namespace detail {

// Default wavelength grid shared by the built-in tables: 1260..1675 nm, 5 nm.
inline std::vector<double> default_lambda_grid() {
  std::vector<double> l;
  for (int i = 0; i <= 83; ++i) l.push_back((1260.0 + 5.0 * i) * 1e-9);
  return l;
}

}  // namespace detail

// Built-in single-mode fibre description for the 1260-1675 nm band:
//  - D(lambda): quadratic through zero at 1302.3 nm, G.652-like magnitudes
//  - attenuation: Rayleigh 1/lambda^4 plus infrared tail, anchored to
//    0.32 dB/km at 1310 nm and 0.19 dB/km at 1550 nm
//  - A_eff: step-index estimate (4.1 um core radius, 0.36% contrast)
//  - n2: shallow linear slope, calibrated to gamma = 2 /W/km at 1302.3 nm
//  - Raman gain: triangular, peak 0.39 /W/km at 13.2 THz, zero past 30 THz
[[nodiscard]] inline FibreSpec default_fibre() {
  FibreSpec f;

  const std::vector<double> grid = detail::default_lambda_grid();

  // Dispersion table. Quadratic in nm with roots 1302.3 and 2986.799283154149.
  {
    const double a = -4.837314933693081e-5;  // ps/(nm km) per nm^2
    const double r1 = 1302.3, r2 = 2986.799283154149;
    f.d_table.x = grid;
    f.d_table.y.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double lnm = grid[i] * 1e9;
      f.d_table.y[i] = a * (lnm - r1) * (lnm - r2) * 1e-6;  // s/m^2
    }
  }
  f.dispersion = fit_dispersion(f.d_table, 1438e-9, 2);

  // Attenuation: alpha_dB(lambda) = cr / l^4 + air * exp(-lir / l), l in um.
  {
    const double cr = 0.9421437757062556;      // dB/km um^4
    const double air = 1.0264019670371897e12;  // dB/km
    const double lir = 48.48;                  // um
    f.attenuation.alpha_db_km.x = grid;
    f.attenuation.alpha_db_km.y.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double lum = grid[i] * 1e6;
      f.attenuation.alpha_db_km.y[i] = cr / (lum * lum * lum * lum) + air * std::exp(-lir / lum);
    }
  }

  // Effective area, Marcuse mode-field estimate for a = 4.1 um, NA 0.123.
  {
    const double a_core = 4.1e-6;
    const double n_clad = 1.444;
    const double n_core = n_clad / std::sqrt(1.0 - 2.0 * 0.0036);
    const double na = std::sqrt(n_core * n_core - n_clad * n_clad);
    f.nonlinear.aeff.x = grid;
    f.nonlinear.aeff.y.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = 2.0 * kPi * a_core * na / grid[i];
      const double w = a_core * (0.65 + 1.619 * std::pow(v, -1.5) + 2.879 * std::pow(v, -6.0));
      f.nonlinear.aeff.y[i] = kPi * w * w;
    }
  }

  // n2 line; intercept chosen so that the gamma calibration below is exact.
  f.nonlinear.lambda_ref = 1302.3e-9;
  f.nonlinear.n2_intercept = 2.6040013328848567e-20;
  f.nonlinear.n2_slope = -4.5e-15;
  f.nonlinear.n2_scale = 1.0;
  // Calibrate: gamma(1302.3 nm) = 2e-3 /(W m), exact by construction.
  {
    const double g0 = gamma_at(f, 1302.3e-9);
    f.nonlinear.n2_scale = 2.0e-3 / g0;
  }

  // Triangular Raman gain efficiency, referenced to 80 um^2.
  f.raman.aeff_ref = 80e-12;
  f.raman.gain.x = {0.0, 13.2e12, 30e12, 100e12};
  f.raman.gain.y = {0.0, 0.39e-3, 0.0, 0.0};

  f.validate();
  return f;
}

}  // namespace uwblink
