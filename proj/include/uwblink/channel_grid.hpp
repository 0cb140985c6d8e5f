#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "uwblink/units.hpp"

namespace uwblink {

// WDM comb with rectangular per-channel spectra. Frequencies are absolute Hz,
// ascending, equally spaced. Guard channels occupy grid slots but carry zero
// launch PSD and are skipped by the solvers.
struct ChannelGrid {
  std::vector<double> freq;      // channel centre frequencies, Hz
  std::vector<double> psd;       // launch PSD per channel, W/Hz (0 for guards)
  std::vector<std::uint8_t> guard;
  double spacing = 0.0;          // Hz
  double bch = 0.0;              // occupied width per channel, Hz
  double centre = 0.0;           // grid centre frequency (reference), Hz
  double half_band = 0.0;        // hull half-width about `centre`, Hz

  [[nodiscard]] std::size_t size() const { return freq.size(); }

  [[nodiscard]] double offset(std::size_t i) const { return freq[i] - centre; }

  [[nodiscard]] double channel_power(std::size_t i) const { return psd[i] * bch; }

  void set_channel_power(std::size_t i, double watts) {
    psd[i] = guard[i] ? 0.0 : watts / bch;
  }

  // Rectangular transmit PSD at an absolute frequency.
  [[nodiscard]] double psd_at(double nu) const {
    const double pos = (nu - freq.front()) / spacing;
    const auto i = static_cast<long>(std::lround(pos));
    if (i < 0 || i >= static_cast<long>(freq.size())) return 0.0;
    const auto u = static_cast<std::size_t>(i);
    if (std::abs(nu - freq[u]) > 0.5 * bch) return 0.0;
    return psd[u];
  }

  void validate() const {
    if (freq.size() < 1) throw ConfigError("channel grid is empty");
    if (!(spacing > 0.0) || !(bch > 0.0)) throw ConfigError("grid spacing and width must be > 0");
    if (bch > spacing + 1e-9) throw ConfigError("channel width exceeds spacing");
    if (psd.size() != freq.size() || guard.size() != freq.size()) {
      throw ConfigError("grid arrays must have equal length");
    }
    for (std::size_t i = 0; i < freq.size(); ++i) {
      if (psd[i] < 0.0) throw ConfigError("negative launch PSD");
      if (i > 0 && !(freq[i] > freq[i - 1])) throw ConfigError("grid must ascend in frequency");
      if (i > 0 && std::abs((freq[i] - freq[i - 1]) - spacing) > 1e-3) {
        throw ConfigError("grid must be equally spaced");
      }
    }
    const double need =
        std::max(std::abs(freq.front() - centre), std::abs(freq.back() - centre)) + 0.5 * bch;
    if (half_band + 1e-3 < need) throw ConfigError("half_band smaller than occupied hull");
  }
};

[[nodiscard]] inline ChannelGrid make_uniform_grid(std::size_t n_channels, double spacing_hz,
                                                   double bch_hz, double centre_hz) {
  if (n_channels == 0) throw ConfigError("need at least one channel");
  ChannelGrid g;
  g.spacing = spacing_hz;
  g.bch = bch_hz;
  g.centre = centre_hz;
  g.freq.resize(n_channels);
  g.psd.assign(n_channels, 0.0);
  g.guard.assign(n_channels, 0);
  const double mid = 0.5 * static_cast<double>(n_channels - 1);
  for (std::size_t i = 0; i < n_channels; ++i) {
    g.freq[i] = centre_hz + (static_cast<double>(i) - mid) * spacing_hz;
  }
  g.half_band = (static_cast<double>(n_channels - 1) * 0.5) * spacing_hz + 0.5 * bch_hz;
  g.validate();
  return g;
}

inline void set_uniform_launch(ChannelGrid& g, double power_per_channel_w) {
  for (std::size_t i = 0; i < g.size(); ++i) g.set_channel_power(i, power_per_channel_w);
}

// Transmission band geometry plus the per-band quantities the link layer
// needs (amplifier noise figure, power-profile segment bandwidth).
struct Band {
  std::string name;
  double lambda_lo = 0.0;   // m, inclusive
  double lambda_hi = 0.0;   // m, exclusive
  double nf_db = 5.0;
  double seg_bandwidth = 1.5e12;  // Hz per optimisation segment
};

struct BandPlan {
  std::vector<Band> bands;           // ascending in wavelength
  double guard_half_width = 2.5e-9;  // guard zone about interior boundaries, m

  [[nodiscard]] int band_of_lambda(double lambda_m) const {
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (lambda_m >= bands[b].lambda_lo && lambda_m < bands[b].lambda_hi) {
        return static_cast<int>(b);
      }
    }
    return -1;
  }

  [[nodiscard]] bool in_guard_zone(double lambda_m) const {
    for (std::size_t b = 0; b + 1 < bands.size(); ++b) {
      if (std::abs(lambda_m - bands[b].lambda_hi) <= guard_half_width) return true;
    }
    return false;
  }
};

[[nodiscard]] inline BandPlan default_band_plan() {
  BandPlan p;
  p.bands = {
      {"O", 1260e-9, 1360e-9, 7.0, 0.75e12},
      {"E", 1360e-9, 1460e-9, 7.0, 1.5e12},
      {"S", 1460e-9, 1530e-9, 7.0, 1.5e12},
      {"C", 1530e-9, 1565e-9, 5.0, 1.5e12},
      {"L", 1565e-9, 1625e-9, 6.0, 1.5e12},
      {"U", 1625e-9, 1675e-9, 8.0, 1.5e12},
  };
  return p;
}

// Full-band comb: 589 channels on a 100 GHz grid centred at c/1438 nm,
// with channels falling in the 5 nm inter-band gaps marked as guards.
[[nodiscard]] inline ChannelGrid make_default_uwb_grid(const BandPlan& plan,
                                                       double symbol_rate_hz = 96e9,
                                                       double spacing_hz = 100e9,
                                                       std::size_t n_channels = 589) {
  ChannelGrid g =
      make_uniform_grid(n_channels, spacing_hz, symbol_rate_hz, lambda_to_freq(1438e-9));
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.guard[i] = plan.in_guard_zone(freq_to_lambda(g.freq[i])) ? 1 : 0;
  }
  return g;
}

}  // namespace uwblink
