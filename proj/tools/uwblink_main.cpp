#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uwblink/csv.hpp"
#include "uwblink/gn_closed_form.hpp"
#include "uwblink/gn_integral.hpp"
#include "uwblink/link_optimizer.hpp"
#include "uwblink/scenario.hpp"
#include "uwblink/ssfm.hpp"

namespace {

using namespace uwblink;

constexpr const char* kVersion = "uwblink 1.0.0";

struct CliOptions {
  std::string scenario_path;
  std::string model = "integral";
  std::string out_dir = ".";
  int workers = -1;        // -1: keep scenario value
  long long seed = -1;     // -1: keep scenario value
};

Scenario load(const CliOptions& opt) {
  Scenario sc = opt.scenario_path.empty() ? default_scenario() : load_scenario(opt.scenario_path);
  if (opt.workers >= 0) {
    sc.gn.workers = opt.workers;
    sc.link.gn.workers = opt.workers;
    for (auto& p : sc.link.phases) p.workers = opt.workers;
  }
  if (opt.seed >= 0) sc.ssfm.rng_seed = static_cast<std::uint64_t>(opt.seed);
  return sc;
}

std::string out_path(const CliOptions& opt, const Scenario& sc, const std::string& stem) {
  return opt.out_dir + "/" + sc.name + "_" + stem + ".csv";
}

void write_common_meta(CsvWriter& csv, const Scenario& sc) {
  csv.meta("version", kVersion);
  csv.meta("scenario", sc.name);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(sc.hash));
  csv.meta("scenario_hash", hash);
}

void write_solver_meta(CsvWriter& csv, const GnSolverConfig& gn) {
  csv.meta("n_r", static_cast<double>(gn.n_r));
  csv.meta("step_density_per_km", gn.mean_step_density);
  csv.meta("u1_sampling", gn.u1_sampling == GnSolverConfig::U1Sampling::kLog ? "log" : "uniform");
}

const char* band_name(const Scenario& sc, double freq) {
  const int b = sc.plan.band_of_lambda(freq_to_lambda(freq));
  return b < 0 ? "-" : sc.plan.bands[static_cast<std::size_t>(b)].name.c_str();
}

int cmd_fibre(const CliOptions& opt) {
  const Scenario sc = load(opt);
  CsvWriter csv(out_path(opt, sc, "fibre"));
  write_common_meta(csv, sc);
  write_solver_meta(csv, sc.gn);
  const double lambda_zd = zero_dispersion_wavelength(sc.fibre.dispersion);
  csv.meta("lambda_zd_nm", lambda_zd * 1e9);
  csv.header({"lambda_nm", "alpha_db_km", "d_ps_nm_km", "gamma_per_w_km", "aeff_um2"});
  // Sweep the wavelength range the band plan spans, 5 nm apart; no bands
  // means no rows.
  std::size_t rows = 0;
  if (!sc.plan.bands.empty()) {
    double lo = sc.plan.bands.front().lambda_lo;
    double hi = sc.plan.bands.front().lambda_hi;
    for (const Band& b : sc.plan.bands) {
      lo = std::min(lo, b.lambda_lo);
      hi = std::max(hi, b.lambda_hi);
    }
    const double lo_nm = std::round(lo * 1e15) / 1e6;
    const double hi_nm = std::round(hi * 1e15) / 1e6;
    for (double nm = lo_nm; nm <= hi_nm + 1e-9; nm += 5.0) {
      const double lam = nm * 1e-9;
      csv.row({format_full(nm),
               format_full(attenuation_at(sc.fibre, lam) / db_per_km_to_per_m(1.0)),
               format_full(dispersion_at(sc.fibre.dispersion, lam) * 1e6),
               format_full(gamma_at(sc.fibre, lam) * 1e3),
               format_full(aeff_at(sc.fibre, lam) * 1e12)});
      ++rows;
    }
  }
  std::printf("fibre table written: %zu rows, lambda_zd = %.4f nm\n", rows, lambda_zd * 1e9);
  return 0;
}

void write_nli_csv(CsvWriter& csv, const Scenario& sc, const NliResult& res,
                   const std::string& model) {
  write_common_meta(csv, sc);
  csv.meta("model", model);
  write_solver_meta(csv, sc.gn);
  csv.header({"channel", "freq_thz", "lambda_nm", "band", "guard", "launch_dbm", "eta_inv_w2",
              "eta_db", "nli_power_w"});
  for (std::size_t i = 0; i < sc.grid.size(); ++i) {
    const double f = sc.grid.freq[i];
    const bool skipped = res.skipped[i] != 0;
    csv.row({std::to_string(i), format_full(f / 1e12), format_full(freq_to_lambda(f) * 1e9),
             band_name(sc, f), sc.grid.guard[i] ? "1" : "0",
             skipped ? "" : format_full(watt_to_dbm(sc.grid.channel_power(i))),
             skipped ? "" : format_full(res.eta[i]),
             skipped ? "" : format_full(10.0 * std::log10(res.eta[i])),
             skipped ? "" : format_full(res.nli_power[i])});
  }
}

int cmd_nli(const CliOptions& opt) {
  const Scenario sc = load(opt);
  DistanceGrid zgrid = build_distance_grid(sc.fibre.length_m, sc.gn.mean_step_density);
  PowerEvolution evo = solve_power_evolution(sc.fibre, sc.grid, zgrid, sc.link.raman);
  std::vector<PowerEvolution> spans(static_cast<std::size_t>(sc.fibre.span_count), evo);
  const BetaCoefficients betas =
      beta_from_dispersion(sc.fibre.dispersion, freq_to_lambda(sc.grid.centre));

  NliResult res;
  if (opt.model == "integral") {
    res = all_channels_nli(sc.grid, spans, betas, sc.fibre, sc.gn);
  } else if (opt.model == "cfm") {
    res = cfm_all_channels_nli(sc.grid, spans, betas, sc.fibre);
  } else {
    throw ConfigError("--model must be integral or cfm");
  }

  CsvWriter csv(out_path(opt, sc, "nli_" + opt.model));
  write_nli_csv(csv, sc, res, opt.model);
  std::printf("model=%s n_r=%d density=%.3g wall_s=%.3f\n", opt.model.c_str(), sc.gn.n_r,
              sc.gn.mean_step_density, res.elapsed_seconds);
  return 0;
}

int cmd_validate(const CliOptions& opt) {
  const Scenario sc = load(opt);
  DistanceGrid zgrid = build_distance_grid(sc.fibre.length_m, sc.gn.mean_step_density);
  PowerEvolution evo = solve_power_evolution(sc.fibre, sc.grid, zgrid, sc.link.raman);
  std::vector<PowerEvolution> spans(static_cast<std::size_t>(sc.fibre.span_count), evo);
  const BetaCoefficients betas =
      beta_from_dispersion(sc.fibre.dispersion, freq_to_lambda(sc.grid.centre));
  // The simulator runs one gamma for the whole comb; default it to the grid
  // centre value so both models agree on the nonlinearity there.
  SsfmConfig ssfm = sc.ssfm;
  if (ssfm.gamma_override < 0.0) {
    ssfm.gamma_override = gamma_at(sc.fibre, freq_to_lambda(sc.grid.centre));
  }
  NliResult gn_res = all_channels_nli(sc.grid, spans, betas, sc.fibre, sc.gn);

  SsfmSignal sig = generate_waveform(sc.grid, ssfm);
  FieldState rx = propagate(sig.field, sc.fibre, ssfm);
  std::vector<double> eta_ssfm = extract_eta(rx, sig.tx, sc.grid, ssfm, sc.fibre);

  CsvWriter csv(out_path(opt, sc, "validate"));
  write_common_meta(csv, sc);
  write_solver_meta(csv, sc.gn);
  csv.meta("seed", static_cast<double>(ssfm.rng_seed));
  csv.meta("symbols", static_cast<double>(ssfm.symbols_per_channel));
  csv.header({"channel", "freq_thz", "eta_gn_db", "eta_ssfm_db", "delta_db"});
  double mean_abs = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < sc.grid.size(); ++i) {
    if (gn_res.skipped[i]) continue;
    const double g_db = 10.0 * std::log10(gn_res.eta[i]);
    const double s_db = 10.0 * std::log10(eta_ssfm[i]);
    csv.row({std::to_string(i), format_full(sc.grid.freq[i] / 1e12), format_full(g_db),
             format_full(s_db), format_full(g_db - s_db)});
    mean_abs += std::abs(g_db - s_db);
    ++active;
  }
  if (active) mean_abs /= static_cast<double>(active);
  std::printf("validate: %zu channels, mean |delta| = %.3f dB\n", active, mean_abs);
  return 0;
}

int cmd_optimize(const CliOptions& opt) {
  const Scenario sc = load(opt);
  OptimiseOutcome out =
      optimise_launch_powers(sc.fibre, sc.grid, sc.plan, sc.link, sc.optimise_initial_dbm);
  const GnSolverConfig& final_gn = sc.link.phases.empty() ? sc.link.gn : sc.link.phases.back();
  const std::size_t n_phases = sc.link.phases.empty() ? 1 : sc.link.phases.size();

  CsvWriter prof(out_path(opt, sc, "profile"));
  write_common_meta(prof, sc);
  write_solver_meta(prof, final_gn);
  prof.meta("phases", static_cast<double>(n_phases));
  prof.meta("freeze_eta", sc.link.freeze_eta ? "on" : "off");
  prof.meta("converged", out.solver.converged ? "yes" : "no");
  prof.meta("max_proj_grad", out.solver.max_proj_grad);
  prof.header({"band", "edge_freq_thz", "power_dbm"});
  for (const auto& band : out.profile.bands) {
    for (std::size_t e = 0; e < band.edge_freq.size(); ++e) {
      prof.row({band.name, format_full(band.edge_freq[e] / 1e12),
                format_full(band.edge_dbm[e])});
    }
  }

  CsvWriter rep(out_path(opt, sc, "report"));
  write_common_meta(rep, sc);
  write_solver_meta(rep, final_gn);
  rep.meta("phases", static_cast<double>(n_phases));
  rep.meta("freeze_eta", sc.link.freeze_eta ? "on" : "off");
  rep.meta("loss_value", out.report.loss_value);
  rep.meta("total_capacity_tbps", out.report.total_capacity / 1e12);
  rep.meta("total_power_dbm", out.report.total_power_dbm);
  rep.header({"channel", "freq_thz", "band", "guard", "launch_dbm", "eta_db", "p_ase_w", "snr_db",
              "capacity_gbps"});
  for (std::size_t i = 0; i < out.report.channels.size(); ++i) {
    const ChannelReport& c = out.report.channels[i];
    if (c.guard) {
      rep.row({std::to_string(i), format_full(c.freq / 1e12), band_name(sc, c.freq), "1", "", "",
               "", "", ""});
      continue;
    }
    rep.row({std::to_string(i), format_full(c.freq / 1e12), band_name(sc, c.freq), "0",
             format_full(c.launch_dbm), format_full(10.0 * std::log10(c.eta)),
             format_full(c.p_ase), format_full(c.snr_db), format_full(c.capacity / 1e9)});
  }
  std::printf("optimize: converged=%s max|grad|=%.4g L=%.6f capacity=%.3f Tbps power=%.2f dBm\n",
              out.solver.converged ? "yes" : "no", out.solver.max_proj_grad,
              out.report.loss_value, out.report.total_capacity / 1e12,
              out.report.total_power_dbm);
  return 0;
}

int cmd_power_evolution(const CliOptions& opt) {
  const Scenario sc = load(opt);
  DistanceGrid zgrid = build_distance_grid(sc.fibre.length_m, sc.gn.mean_step_density);
  PowerEvolution evo = solve_power_evolution(sc.fibre, sc.grid, zgrid, sc.link.raman);
  CsvWriter csv(out_path(opt, sc, "power_evolution"));
  write_common_meta(csv, sc);
  write_solver_meta(csv, sc.gn);
  csv.meta("raman", sc.link.raman.include_raman ? "on" : "off");
  csv.header({"channel", "freq_thz", "z_km", "rho"});
  for (std::size_t ch = 0; ch < evo.channels(); ++ch) {
    for (std::size_t m = 0; m < evo.steps(); ++m) {
      csv.row({std::to_string(ch), format_full(evo.freq[ch] / 1e12),
               format_full(evo.grid.mid[m] / 1e3), format_full(evo.rho(ch, m))});
    }
    csv.row({std::to_string(ch), format_full(evo.freq[ch] / 1e12),
             format_full(evo.grid.length / 1e3), format_full(evo.rho_end[ch])});
  }
  std::printf("power evolution written: %zu channels, %zu steps\n", evo.channels(), evo.steps());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wideband WDM link NLI / SNR / throughput toolkit"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--scenario", opt.scenario_path, "Scenario JSON path (omit for defaults)");
  app.add_option("--out-dir", opt.out_dir, "Output directory for CSV files");
  app.add_option("--workers", opt.workers, "Worker threads (0 = all cores)");
  app.add_option("--seed", opt.seed, "Simulator RNG seed override");

  auto* fibre = app.add_subcommand("fibre", "Emit fibre parameter curves");
  auto* nli = app.add_subcommand("nli", "Per-channel NLI via the selected model");
  nli->add_option("--model", opt.model, "integral | cfm");
  auto* validate = app.add_subcommand("validate", "Integral model vs split-step simulator");
  auto* optimize = app.add_subcommand("optimize", "Launch-power optimisation");
  auto* powevo = app.add_subcommand("power-evolution", "Per-channel power profile along the span");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fibre->parsed()) return cmd_fibre(opt);
    if (nli->parsed()) return cmd_nli(opt);
    if (validate->parsed()) return cmd_validate(opt);
    if (optimize->parsed()) return cmd_optimize(opt);
    if (powevo->parsed()) return cmd_power_evolution(opt);
  } catch (const uwblink::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const uwblink::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
