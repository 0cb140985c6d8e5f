#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uwblink/channel_grid.hpp"
#include "uwblink/fibre_model.hpp"
#include "uwblink/gn_integral.hpp"
#include "uwblink/link_optimizer.hpp"
#include "uwblink/raman_power.hpp"
#include "uwblink/ssfm.hpp"
#include "uwblink/units.hpp"

namespace uwblink {

// Everything one pipeline run needs, assembled from a JSON file whose keys
// carry their units. Anything not present falls back to the built-in
// wideband defaults.
struct Scenario {
  std::string name = "default";
  FibreSpec fibre;
  ChannelGrid grid;
  BandPlan plan;
  GnSolverConfig gn;
  SsfmConfig ssfm;
  LinkConfig link;
  double launch_dbm = 0.0;
  double optimise_initial_dbm = 0.0;
  std::uint64_t hash = 0;  // FNV-1a of the canonical JSON
};

[[nodiscard]] inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

[[nodiscard]] inline TabulatedProfile profile_from_json(const nlohmann::json& j,
                                                        const std::string& x_key,
                                                        const std::string& y_key, double x_scale,
                                                        double y_scale) {
  TabulatedProfile p;
  if (!j.contains(x_key) || !j.contains(y_key)) {
    throw ConfigError("profile override needs " + x_key + " and " + y_key);
  }
  for (const auto& v : j.at(x_key)) p.x.push_back(v.get<double>() * x_scale);
  for (const auto& v : j.at(y_key)) p.y.push_back(v.get<double>() * y_scale);
  return p;
}

// Two-column table, one "wavelength_nm,value" pair per line. Blank lines and
// '#' comments are skipped; commas and whitespace both separate the columns,
// and a single leading header line is tolerated.
[[nodiscard]] inline TabulatedProfile profile_from_csv(const std::string& path, double x_scale,
                                                       double y_scale) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile table: " + path);
  TabulatedProfile p;
  std::string line;
  bool allow_header = true;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0.0;
    double y = 0.0;
    if (row >> x >> y) {
      p.x.push_back(x * x_scale);
      p.y.push_back(y * y_scale);
      allow_header = false;
      continue;
    }
    if (allow_header) {
      allow_header = false;
      continue;
    }
    throw ConfigError("bad profile row in " + path + ": " + line);
  }
  if (p.x.empty()) throw ConfigError("profile table has no data rows: " + path);
  return p;
}

// A profile override is either an inline table object or a string naming a
// two-column CSV file, resolved relative to the scenario file.
[[nodiscard]] inline TabulatedProfile profile_override(const nlohmann::json& j,
                                                       const std::string& x_key,
                                                       const std::string& y_key, double x_scale,
                                                       double y_scale,
                                                       const std::string& base_dir) {
  if (j.is_string()) {
    const std::filesystem::path p =
        std::filesystem::path(base_dir) / j.get<std::string>();
    return profile_from_csv(p.string(), x_scale, y_scale);
  }
  return profile_from_json(j, x_key, y_key, x_scale, y_scale);
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

[[nodiscard]] inline Scenario scenario_from_json(const nlohmann::json& j,
                                                 const std::string& base_dir = "") {
  Scenario sc;
  sc.fibre = default_fibre();
  sc.plan = default_band_plan();

  detail::maybe(j, "name", sc.name);

  if (j.contains("bands")) {
    sc.plan.bands.clear();
    for (const auto& bj : j.at("bands")) {
      Band b;
      b.name = bj.at("name").get<std::string>();
      b.lambda_lo = bj.at("lambda_nm").at(0).get<double>() * 1e-9;
      b.lambda_hi = bj.at("lambda_nm").at(1).get<double>() * 1e-9;
      detail::maybe(bj, "nf_db", b.nf_db);
      if (bj.contains("seg_bandwidth_thz")) {
        b.seg_bandwidth = bj.at("seg_bandwidth_thz").get<double>() * 1e12;
      }
      sc.plan.bands.push_back(b);
    }
  }
  if (j.contains("guard_half_width_nm")) {
    sc.plan.guard_half_width = j.at("guard_half_width_nm").get<double>() * 1e-9;
  }

  if (j.contains("fibre")) {
    const auto& fj = j.at("fibre");
    if (fj.contains("length_km")) sc.fibre.length_m = fj.at("length_km").get<double>() * 1e3;
    detail::maybe(fj, "spans", sc.fibre.span_count);
    if (fj.contains("attenuation")) {
      sc.fibre.attenuation.alpha_db_km = detail::profile_override(
          fj.at("attenuation"), "lambda_nm", "alpha_db_km", 1e-9, 1.0, base_dir);
    }
    if (fj.contains("aeff")) {
      sc.fibre.nonlinear.aeff =
          detail::profile_override(fj.at("aeff"), "lambda_nm", "aeff_um2", 1e-9, 1e-12, base_dir);
    }
    if (fj.contains("dispersion")) {
      sc.fibre.d_table = detail::profile_override(fj.at("dispersion"), "lambda_nm", "d_ps_nm_km",
                                                  1e-9, 1e-6, base_dir);
    }
  }

  std::size_t channels = 589;
  double spacing = 100e9;
  double symbol_rate = 96e9;
  double centre = lambda_to_freq(1438e-9);
  std::string guards = "auto";
  if (j.contains("grid")) {
    const auto& gj = j.at("grid");
    detail::maybe(gj, "channels", channels);
    if (gj.contains("spacing_ghz")) spacing = gj.at("spacing_ghz").get<double>() * 1e9;
    if (gj.contains("symbol_rate_ghz")) symbol_rate = gj.at("symbol_rate_ghz").get<double>() * 1e9;
    if (gj.contains("centre_nm")) centre = lambda_to_freq(gj.at("centre_nm").get<double>() * 1e-9);
    if (gj.contains("centre_thz")) centre = gj.at("centre_thz").get<double>() * 1e12;
    detail::maybe(gj, "guards", guards);
    detail::maybe(gj, "launch_dbm", sc.launch_dbm);
  }
  sc.grid = make_uniform_grid(channels, spacing, symbol_rate, centre);
  if (guards == "auto") {
    for (std::size_t i = 0; i < sc.grid.size(); ++i) {
      sc.grid.guard[i] = sc.plan.in_guard_zone(freq_to_lambda(sc.grid.freq[i])) ? 1 : 0;
    }
  } else if (guards != "none") {
    throw ConfigError("grid.guards must be \"auto\" or \"none\"");
  }
  set_uniform_launch(sc.grid, dbm_to_watt(sc.launch_dbm));

  if (j.contains("fibre")) {
    const auto& fj = j.at("fibre");
    if (fj.contains("dispersion")) {
      sc.fibre.dispersion = fit_dispersion(sc.fibre.d_table, freq_to_lambda(sc.grid.centre), 2);
    }
  }
  sc.fibre.validate();

  if (j.contains("raman_enabled")) {
    sc.link.raman.include_raman = j.at("raman_enabled").get<bool>();
  }

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    detail::maybe(s, "n_r", sc.gn.n_r);
    detail::maybe(s, "step_density_per_km", sc.gn.mean_step_density);
    detail::maybe(s, "workers", sc.gn.workers);
    detail::maybe(s, "u1_min_ratio", sc.gn.u1_min_ratio);
    if (s.contains("u1_sampling")) {
      const auto mode = s.at("u1_sampling").get<std::string>();
      if (mode == "log") {
        sc.gn.u1_sampling = GnSolverConfig::U1Sampling::kLog;
      } else if (mode == "uniform") {
        sc.gn.u1_sampling = GnSolverConfig::U1Sampling::kUniform;
      } else {
        throw ConfigError("solver.u1_sampling must be \"log\" or \"uniform\"");
      }
    }
    if (s.contains("simpson")) sc.gn.simpson_channel_average = s.at("simpson").get<bool>();
  }

  if (j.contains("ssfm")) {
    const auto& s = j.at("ssfm");
    detail::maybe(s, "symbols", sc.ssfm.symbols_per_channel);
    detail::maybe(s, "samples_per_symbol", sc.ssfm.samples_per_symbol);
    detail::maybe(s, "rolloff", sc.ssfm.rolloff);
    detail::maybe(s, "goal_local_error", sc.ssfm.goal_local_error);
    detail::maybe(s, "seed", sc.ssfm.rng_seed);
    detail::maybe(s, "include_isrs", sc.ssfm.include_isrs);
    if (s.contains("gamma_per_w_km")) {
      sc.ssfm.gamma_override = s.at("gamma_per_w_km").get<double>() * 1e-3;
    }
    sc.ssfm.validate();
  }

  sc.link.gn = sc.gn;
  if (j.contains("optimiser")) {
    const auto& o = j.at("optimiser");
    if (o.contains("mode")) {
      const auto mode = o.at("mode").get<std::string>();
      if (mode == "uniform") {
        sc.link.uniform_mode = true;
      } else if (mode == "segmented") {
        sc.link.uniform_mode = false;
      } else {
        throw ConfigError("optimiser.mode must be \"uniform\" or \"segmented\"");
      }
    }
    if (o.contains("bounds_dbm")) {
      sc.link.bound_lo_dbm = o.at("bounds_dbm").at(0).get<double>();
      sc.link.bound_hi_dbm = o.at("bounds_dbm").at(1).get<double>();
    }
    detail::maybe(o, "grad_tol", sc.link.lbfgs.grad_tol);
    detail::maybe(o, "max_iterations", sc.link.lbfgs.max_iterations);
    detail::maybe(o, "fd_step_db", sc.link.fd_step_db);
    detail::maybe(o, "freeze_eta", sc.link.freeze_eta);
    detail::maybe(o, "initial_dbm", sc.optimise_initial_dbm);
    if (o.contains("snr_trx_db")) {
      sc.link.snr_trx_db = o.at("snr_trx_db").get<double>();
      sc.link.use_snr_trx = true;
    }
    if (o.contains("phases")) {
      for (const auto& pj : o.at("phases")) {
        GnSolverConfig phase = sc.gn;
        detail::maybe(pj, "n_r", phase.n_r);
        detail::maybe(pj, "step_density_per_km", phase.mean_step_density);
        sc.link.phases.push_back(phase);
      }
    }
  }

  sc.hash = fnv1a64(j.dump());
  return sc;
}

[[nodiscard]] inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
  try {
    return scenario_from_json(j, std::filesystem::path(path).parent_path().string());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario field error: ") + e.what());
  }
}

[[nodiscard]] inline Scenario default_scenario() {
  return scenario_from_json(nlohmann::json::object());
}

}  // namespace uwblink
