#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "uwblink/units.hpp"

namespace uwblink {

// Box-bounded limited-memory quasi-Newton descent: two-loop L-BFGS direction,
// gradient projection at active bounds, Armijo backtracking on the projected
// iterate. Good enough for smooth low-dimensional launch-power surfaces; no
// global claims.
struct BoundedLbfgsOptions {
  int memory = 8;
  int max_iterations = 500;
  double grad_tol = 0.01;    // stop on max |projected gradient|
  double armijo_c = 1e-4;
  int max_backtracks = 30;
};

struct BoundedLbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  double max_proj_grad = 0.0;
  std::vector<double> f_history;  // accepted objective values, first entry is f(x0)
};

using ValueFn = std::function<double(const std::vector<double>&)>;
// Gradient callback receives the point and its already-computed value so a
// forward-difference implementation can reuse it.
using GradientFn = std::function<std::vector<double>(const std::vector<double>&, double)>;

namespace detail {

inline void clamp_to_box(std::vector<double>& x, const std::vector<double>& lo,
                         const std::vector<double>& hi) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i]) x[i] = lo[i];
    if (x[i] > hi[i]) x[i] = hi[i];
  }
}

[[nodiscard]] inline std::vector<double> projected_gradient(const std::vector<double>& x,
                                                            const std::vector<double>& g,
                                                            const std::vector<double>& lo,
                                                            const std::vector<double>& hi) {
  std::vector<double> pg(g);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double span = hi[i] - lo[i];
    const double eps = 1e-12 * std::max(1.0, span);
    if (x[i] <= lo[i] + eps && g[i] > 0.0) pg[i] = 0.0;
    if (x[i] >= hi[i] - eps && g[i] < 0.0) pg[i] = 0.0;
  }
  return pg;
}

[[nodiscard]] inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

[[nodiscard]] inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

[[nodiscard]] inline BoundedLbfgsResult minimize_bounded(const ValueFn& value,
                                                         const GradientFn& gradient,
                                                         std::vector<double> x0,
                                                         const std::vector<double>& lo,
                                                         const std::vector<double>& hi,
                                                         const BoundedLbfgsOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (lo.size() != n || hi.size() != n) throw ConfigError("minimize_bounded: bound size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lo[i] <= hi[i])) throw ConfigError("minimize_bounded: lower bound above upper bound");
  }
  detail::clamp_to_box(x0, lo, hi);

  BoundedLbfgsResult res;
  res.x = x0;
  res.f = value(res.x);
  res.evaluations = 1;
  res.f_history.push_back(res.f);

  std::vector<double> g = gradient(res.x, res.f);
  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)

  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it;
    std::vector<double> pg = detail::projected_gradient(res.x, g, lo, hi);
    res.max_proj_grad = detail::max_abs(pg);
    if (res.max_proj_grad <= opt.grad_tol) {
      res.converged = true;
      return res;
    }

    // Two-loop recursion on the full gradient.
    std::vector<double> d(g);
    std::vector<double> alpha(pairs.size());
    for (std::size_t k = pairs.size(); k-- > 0;) {
      const auto& [s, y] = pairs[k];
      const double rho = 1.0 / detail::dot(y, s);
      alpha[k] = rho * detail::dot(s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * y[i];
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      const double scale = detail::dot(s, y) / detail::dot(y, y);
      for (auto& v : d) v *= scale;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& [s, y] = pairs[k];
      const double rho = 1.0 / detail::dot(y, s);
      const double beta = rho * detail::dot(y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * s[i];
    }
    for (auto& v : d) v = -v;
    if (detail::dot(d, g) >= 0.0) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
    }

    // Backtracking on the projected iterate.
    double step = 1.0;
    bool accepted = false;
    std::vector<double> x_new(n);
    double f_new = res.f;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + step * d[i];
      detail::clamp_to_box(x_new, lo, hi);
      std::vector<double> dx(n);
      double gdx = 0.0, move = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dx[i] = x_new[i] - res.x[i];
        gdx += g[i] * dx[i];
        move = std::max(move, std::abs(dx[i]));
      }
      if (move == 0.0) break;
      f_new = value(x_new);
      ++res.evaluations;
      if (f_new <= res.f + opt.armijo_c * gdx) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Quasi-Newton direction exhausted; the projected-gradient norm is the
      // honest convergence statement either way.
      res.converged = res.max_proj_grad <= opt.grad_tol;
      return res;
    }

    std::vector<double> g_new = gradient(x_new, f_new);
    std::vector<double> s(n), y(n);
    double sy = 0.0, ss = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - res.x[i];
      y[i] = g_new[i] - g[i];
      sy += s[i] * y[i];
      ss += s[i] * s[i];
      yy += y[i] * y[i];
    }
    if (sy > 1e-10 * std::sqrt(ss * yy)) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (pairs.size() > static_cast<std::size_t>(opt.memory)) pairs.pop_front();
    }
    res.x = x_new;
    res.f = f_new;
    res.f_history.push_back(f_new);
    g = std::move(g_new);
  }
  res.iterations = opt.max_iterations;
  std::vector<double> pg = detail::projected_gradient(res.x, g, lo, hi);
  res.max_proj_grad = detail::max_abs(pg);
  res.converged = res.max_proj_grad <= opt.grad_tol;
  return res;
}

}  // namespace uwblink
