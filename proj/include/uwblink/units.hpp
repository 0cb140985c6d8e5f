#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace uwblink {

inline constexpr double kSpeedOfLight = 299792458.0;         // m/s
inline constexpr double kPlanck = 6.62607015e-34;            // J s
inline constexpr double kPi = 3.14159265358979323846;

// Library errors are split by who is at fault: bad inputs (configs,
// out-of-range queries) versus numerical breakdown inside a solver.
// The CLI maps them to distinct exit codes.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

[[nodiscard]] inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
[[nodiscard]] inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
[[nodiscard]] inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
[[nodiscard]] inline double watt_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }

// Power attenuation in 1/m from the usual dB/km figure.
[[nodiscard]] inline double db_per_km_to_per_m(double db_km) {
  return db_km * std::log(10.0) / 10.0 / 1000.0;
}

[[nodiscard]] inline double lambda_to_freq(double lambda_m) { return kSpeedOfLight / lambda_m; }
[[nodiscard]] inline double freq_to_lambda(double freq_hz) { return kSpeedOfLight / freq_hz; }

}  // namespace uwblink
