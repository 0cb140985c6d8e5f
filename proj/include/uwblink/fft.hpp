#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "uwblink/units.hpp"

namespace uwblink {

// In-place complex transforms of one fixed size. Plans are built once with
// FFTW_ESTIMATE (planning is mutex-guarded, execution is thread-safe) and
// FFTW_UNALIGNED so they run on any caller buffer. inverse() applies the 1/n
// scale, so inverse(forward(x)) == x.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n == 0) throw ConfigError("FftPlan: size must be > 0");
    std::vector<std::complex<double>> probe(n);
    auto* p = reinterpret_cast<fftw_complex*>(probe.data());
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_BACKWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!fwd_ || !bwd_) throw SolverError("FftPlan: planner failed");
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  ~FftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
  }

  [[nodiscard]] std::size_t size() const { return n_; }

  void forward(std::vector<std::complex<double>>& x) const {
    check(x);
    auto* p = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(fwd_, p, p);
  }

  void inverse(std::vector<std::complex<double>>& x) const {
    check(x);
    auto* p = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(bwd_, p, p);
    const double s = 1.0 / static_cast<double>(n_);
    for (auto& v : x) v *= s;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  void check(const std::vector<std::complex<double>>& x) const {
    if (x.size() != n_) throw ConfigError("FftPlan: buffer size mismatch");
  }

  std::size_t n_ = 0;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

// Signed frequency of DFT bin k for an n-point transform at sample rate fs.
[[nodiscard]] inline double bin_frequency(std::size_t k, std::size_t n, double fs) {
  const auto half = static_cast<long>(n / 2);
  auto s = static_cast<long>(k);
  if (s >= half) s -= static_cast<long>(n);
  return static_cast<double>(s) * fs / static_cast<double>(n);
}

}  // namespace uwblink
