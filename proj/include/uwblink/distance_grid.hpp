#pragma once

#include <cmath>
#include <vector>

#include "uwblink/units.hpp"

namespace uwblink {

// Logarithmically spaced integration grid along a span. Steps widen with
// distance so the power-evolution sampling is densest where the field is
// strongest. `density` is the mean number of steps per km.
struct DistanceGrid {
  std::vector<double> edge;   // N_M edges, edge[0] = 0, edge[N_M-1] = L, m
  std::vector<double> mid;    // N_M - 1 arithmetic midpoints
  std::vector<double> width;  // N_M - 1 step widths, non-decreasing
  double length = 0.0;        // m
  double density = 0.0;       // steps per km, exactly (N_M - 1) / L_km

  [[nodiscard]] std::size_t steps() const { return mid.size(); }
};

[[nodiscard]] inline DistanceGrid build_distance_grid(double length_m, double density_per_km) {
  if (!(length_m > 0.0)) throw ConfigError("build_distance_grid: length must be > 0");
  if (!(density_per_km > 0.0)) throw ConfigError("build_distance_grid: density must be > 0");

  long n_edges = std::lround(density_per_km * length_m / 1e3) + 1;
  if (n_edges < 2) n_edges = 2;
  const auto n = static_cast<std::size_t>(n_edges);
  const double n_steps = static_cast<double>(n - 1);

  DistanceGrid g;
  g.length = length_m;
  g.density = n_steps / length_m * 1e3;
  g.edge.resize(n);

  const double uniform_step = length_m / n_steps;
  const double first_target = 1e3 / (10.0 * density_per_km);

  if (first_target >= uniform_step * 0.999) {
    for (std::size_t i = 0; i < n; ++i) {
      g.edge[i] = length_m * static_cast<double>(i) / n_steps;
    }
  } else {
    // edge_i = z0 (exp(i T / n_steps) - 1), T = ln(1 + L/z0); pick z0 so the
    // first step matches the target. The first step grows monotonically with
    // z0, so bisection is safe.
    auto first_step = [&](double z0) {
      const double t = std::log1p(length_m / z0);
      return z0 * std::expm1(t / n_steps);
    };
    double lo = length_m * 1e-12, hi = length_m * 1e12;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      (first_step(mid) < first_target ? lo : hi) = mid;
    }
    const double z0 = std::sqrt(lo * hi);
    const double t = std::log1p(length_m / z0);
    for (std::size_t i = 0; i < n; ++i) {
      g.edge[i] = z0 * std::expm1(t * static_cast<double>(i) / n_steps);
    }
  }
  g.edge.front() = 0.0;
  g.edge.back() = length_m;

  g.mid.resize(n - 1);
  g.width.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g.mid[i] = 0.5 * (g.edge[i] + g.edge[i + 1]);
    g.width[i] = g.edge[i + 1] - g.edge[i];
  }
  return g;
}

}  // namespace uwblink
