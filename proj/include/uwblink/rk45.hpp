#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "uwblink/units.hpp"

namespace uwblink {

// Dormand-Prince 5(4) embedded pair with adaptive steps. State is a flat
// vector of doubles; the right-hand side writes dy/dz into its last argument.
struct Rk45Options {
  double rtol = 1e-9;
  double atol = 1e-18;
  double initial_step = 0.0;  // 0 = (z1 - z0) / 100
  std::size_t max_steps = 2000000;
};

using OdeRhs = std::function<void(double z, const std::vector<double>& y, std::vector<double>& dy)>;

class Rk45 {
 public:
  Rk45(OdeRhs rhs, Rk45Options opt) : rhs_(std::move(rhs)), opt_(opt) {}

  // Advances y in place from z0 to z1 (z1 > z0).
  void integrate(double z0, double z1, std::vector<double>& y) {
    const std::size_t n = y.size();
    ensure_scratch(n);
    double z = z0;
    double h = opt_.initial_step > 0.0 ? opt_.initial_step : (z1 - z0) / 100.0;
    std::size_t steps = 0;
    rhs_(z, y, k_[0]);  // FSAL seed
    while (z < z1) {
      if (++steps > opt_.max_steps) throw SolverError("rk45: step budget exhausted");
      if (h > z1 - z) h = z1 - z;
      // Stage evaluations.
      for (int s = 1; s < 7; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
          double acc = 0.0;
          for (int j = 0; j < s; ++j) acc += kA[s][j] * k_[static_cast<std::size_t>(j)][i];
          ytmp_[i] = y[i] + h * acc;
        }
        rhs_(z + kC[s] * h, ytmp_, k_[static_cast<std::size_t>(s)]);
      }
      // 5th-order solution and embedded error estimate.
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double y5 = 0.0, e = 0.0;
        for (int j = 0; j < 7; ++j) {
          y5 += kB5[j] * k_[static_cast<std::size_t>(j)][i];
          e += kE[j] * k_[static_cast<std::size_t>(j)][i];
        }
        ynew_[i] = y[i] + h * y5;
        const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
        const double r = h * e / sc;
        err += r * r;
      }
      err = std::sqrt(err / static_cast<double>(n));
      if (err <= 1.0) {
        z += h;
        y.swap(ynew_);
        k_[0].swap(k_[6]);  // FSAL: last stage is the derivative at the new point
      }
      const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::min(5.0, std::max(0.2, fac));
      if (!(h > 0.0) || !std::isfinite(h)) throw SolverError("rk45: step size underflow");
    }
  }

 private:
  void ensure_scratch(std::size_t n) {
    for (auto& k : k_) k.assign(n, 0.0);
    ytmp_.assign(n, 0.0);
    ynew_.assign(n, 0.0);
  }

  static constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double kA[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
  };
  static constexpr double kB5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784, 11.0 / 84, 0.0};
  static constexpr double kB4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
  static constexpr double kE[7] = {kB5[0] - kB4[0], kB5[1] - kB4[1], kB5[2] - kB4[2],
                                   kB5[3] - kB4[3], kB5[4] - kB4[4], kB5[5] - kB4[5],
                                   kB5[6] - kB4[6]};

  OdeRhs rhs_;
  Rk45Options opt_;
  std::vector<double> k_[7];
  std::vector<double> ytmp_, ynew_;
};

}  // namespace uwblink
