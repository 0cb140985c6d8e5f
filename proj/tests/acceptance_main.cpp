// Release gate: one self-contained check per shipping criterion, each
// printing a single PASS/FAIL line. Run with an index 1..10 or "all".

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "support/test_helpers.hpp"
#include "uwblink/fft.hpp"
#include "uwblink/gn_closed_form.hpp"
#include "uwblink/gn_integral.hpp"
#include "uwblink/link_optimizer.hpp"
#include "uwblink/raman_power.hpp"
#include "uwblink/ssfm.hpp"

namespace {

using namespace uwblink;
namespace fs = std::filesystem;

struct Check {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double dev_db(double a, double b) { return std::abs(10.0 * std::log10(a / b)); }

std::string num(double v, int prec = 3) {
  std::ostringstream ss;
  ss << std::setprecision(prec) << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Hyperbolic quadrature vs brute-force Cartesian quadrature on a
//    high-dispersion 3-channel comb.
Check c1() {
  const auto t0 = std::chrono::steady_clock::now();
  const FibreSpec fibre = uwtest::flat_fibre(0.2, 80e3);
  const ChannelGrid grid = uwtest::toy_grid(3);
  const BetaCoefficients betas{-21e-27, 0.0, 0.0};
  const double gamma = 1.3e-3;

  const DistanceGrid zg = build_distance_grid(fibre.length_m, 0.95);
  RamanSolveOptions raman;
  raman.include_raman = false;
  const std::vector<PowerEvolution> spans{solve_power_evolution(fibre, grid, zg, raman)};

  GnSolverConfig cfg;
  cfg.n_r = 300;
  cfg.mean_step_density = 0.95;
  cfg.workers = 1;

  double worst = 0.0;
  for (std::size_t ch = 0; ch < grid.size(); ++ch) {
    const double hyp = nli_psd_at(grid, spans, betas, gamma, cfg, grid.freq[ch]);
    const double cart = uwtest::cartesian_nli_psd(grid, spans, betas, gamma, grid.freq[ch], 1800);
    worst = std::max(worst, dev_db(hyp, cart));
  }
  const double wall = seconds_since(t0);

  Check c;
  c.pass = worst <= 0.05 && wall < 120.0;
  c.detail = "max quadrature deviation " + num(worst) + " dB (limit 0.05), wall " + num(wall) +
             " s (limit 120)";
  return c;
}

// ---------------------------------------------------------------------------
// 2. Resolution trade-off and scaling on a 64-channel C-band comb.
Check c2() {
  const FibreSpec fibre = default_fibre();
  ChannelGrid grid = make_uniform_grid(64, 100e9, 96e9, lambda_to_freq(1550e-9));
  set_uniform_launch(grid, dbm_to_watt(0.0));
  const BetaCoefficients betas =
      beta_from_dispersion(fibre.dispersion, freq_to_lambda(grid.centre));

  auto run = [&](int n_r, double density, int workers) {
    const DistanceGrid zg = build_distance_grid(fibre.length_m, density);
    const std::vector<PowerEvolution> spans{solve_power_evolution(fibre, grid, zg, {})};
    GnSolverConfig cfg;
    cfg.n_r = n_r;
    cfg.mean_step_density = density;
    cfg.workers = workers;
    return all_channels_nli(grid, spans, betas, fibre, cfg);
  };

  const NliResult ref = run(500, 2.0, 1);
  const NliResult coarse = run(75, 0.95, 1);
  const NliResult mid = run(150, 1.4, 1);
  const NliResult fine = run(300, 1.4, 1);
  const NliResult mid_w4 = run(150, 1.4, 4);

  double dev_coarse = 0.0, dev_mid = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    dev_coarse = std::max(dev_coarse, dev_db(coarse.eta[i], ref.eta[i]));
    dev_mid = std::max(dev_mid, dev_db(mid.eta[i], ref.eta[i]));
  }
  const double ratio = fine.elapsed_seconds / mid.elapsed_seconds;
  const bool identical = mid.eta == mid_w4.eta && mid.nli_power == mid_w4.nli_power;

  std::string speedup_note;
  bool speedup_ok = true;
  if (std::thread::hardware_concurrency() >= 2) {
    const NliResult fine_w2 = run(300, 1.4, 2);
    const double s = fine.elapsed_seconds / fine_w2.elapsed_seconds;
    speedup_ok = s >= 1.6;
    speedup_note = "worker speedup " + num(s) + " (>=1.6)";
  } else {
    speedup_note = "worker speedup SKIP (single-core host)";
  }

  Check c;
  c.pass = dev_coarse <= 0.6 && dev_mid <= 0.15 && ratio >= 2.8 && ratio <= 5.2 && identical &&
           speedup_ok;
  c.detail = "coarse dev " + num(dev_coarse) + " dB (<=0.6), mid dev " + num(dev_mid) +
             " dB (<=0.15), axis-doubling time ratio " + num(ratio) + " (2.8..5.2), " +
             speedup_note + ", workers 1 vs 4 " + (identical ? "identical" : "DIFFER");
  return c;
}

// ---------------------------------------------------------------------------
// 3. Integral model vs split-step simulator on a 5-channel comb at the
//    zero-dispersion wavelength, 2 dBm per channel.
Check c3() {
  const auto t0 = std::chrono::steady_clock::now();
  const FibreSpec fibre = default_fibre();
  ChannelGrid grid = make_uniform_grid(5, 100e9, 96e9, lambda_to_freq(1302.3e-9));
  set_uniform_launch(grid, dbm_to_watt(2.0));
  const BetaCoefficients betas =
      beta_from_dispersion(fibre.dispersion, freq_to_lambda(grid.centre));

  const DistanceGrid zg = build_distance_grid(fibre.length_m, 1.4);
  const std::vector<PowerEvolution> spans{solve_power_evolution(fibre, grid, zg, {})};
  GnSolverConfig cfg;
  cfg.n_r = 150;
  cfg.mean_step_density = 1.4;
  cfg.workers = 1;
  cfg.simpson_channel_average = true;  // receiver-referenced, like the simulator
  const NliResult gn = all_channels_nli(grid, spans, betas, fibre, cfg);

  SsfmConfig sim;
  sim.symbols_per_channel = std::size_t{1} << 14;
  sim.samples_per_symbol = 8;
  sim.goal_local_error = 1e-6;
  sim.include_isrs = true;
  sim.rng_seed = 1;
  SsfmSignal sig = generate_waveform(grid, sim);
  const FieldState rx = propagate(sig.field, fibre, sim);
  const std::vector<double> eta_sim = extract_eta(rx, sig.tx, grid, sim, fibre);

  double mean = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) mean += dev_db(gn.eta[i], eta_sim[i]);
  mean /= static_cast<double>(grid.size());
  const double wall = seconds_since(t0);

  Check c;
  c.pass = mean <= 0.8 && wall < 900.0;
  c.detail = "mean |integral - simulator| " + num(mean) + " dB (limit 0.8), wall " + num(wall) +
             " s (limit 900)";
  return c;
}

// ---------------------------------------------------------------------------
// 4. Cubic launch-power scaling with the Raman coupling disabled.
Check c4() {
  const FibreSpec fibre = default_fibre();
  RamanSolveOptions raman;
  raman.include_raman = false;
  const DistanceGrid zg = build_distance_grid(fibre.length_m, 0.8);
  GnSolverConfig cfg;
  cfg.n_r = 64;
  cfg.mean_step_density = 0.8;
  cfg.workers = 1;

  auto run = [&](double dbm) {
    ChannelGrid grid = make_uniform_grid(16, 100e9, 96e9, lambda_to_freq(1550e-9));
    set_uniform_launch(grid, dbm_to_watt(dbm));
    const std::vector<PowerEvolution> spans{solve_power_evolution(fibre, grid, zg, raman)};
    const BetaCoefficients betas =
        beta_from_dispersion(fibre.dispersion, freq_to_lambda(grid.centre));
    return all_channels_nli(grid, spans, betas, fibre, cfg);
  };

  const NliResult base = run(0.0);
  const NliResult boosted = run(3.0);

  double worst_power_dev = 0.0, worst_eta_rel = 0.0;
  for (std::size_t i = 0; i < base.eta.size(); ++i) {
    const double gain_db = 10.0 * std::log10(boosted.nli_power[i] / base.nli_power[i]);
    worst_power_dev = std::max(worst_power_dev, std::abs(gain_db - 9.0));
    worst_eta_rel = std::max(worst_eta_rel, std::abs(boosted.eta[i] / base.eta[i] - 1.0));
  }

  Check c;
  c.pass = worst_power_dev <= 0.01 && worst_eta_rel <= 1e-6;
  c.detail = "distortion power rise 9 dB +/- " + num(worst_power_dev) +
             " dB (limit 0.01), eta drift " + num(worst_eta_rel) + " rel (limit 1e-6)";
  return c;
}

// ---------------------------------------------------------------------------
// 5. Dispersion-fit roots against the tabulated profile.
Check c5() {
  const FibreSpec fibre = default_fibre();

  double table_root = 0.0;
  const auto& t = fibre.d_table;
  for (std::size_t i = 0; i + 1 < t.x.size(); ++i) {
    if (t.y[i] == 0.0) {
      table_root = t.x[i];
      break;
    }
    if (t.y[i] < 0.0 && t.y[i + 1] >= 0.0) {
      table_root = t.x[i] + (0.0 - t.y[i]) * (t.x[i + 1] - t.x[i]) / (t.y[i + 1] - t.y[i]);
      break;
    }
  }

  const double fit2_root = zero_dispersion_wavelength(fibre.dispersion);
  const DispersionFit fit1 = fit_dispersion(fibre.d_table, 1438e-9, 1);
  const double fit1_root = zero_dispersion_wavelength(fit1);

  const double err2_nm = std::abs(fit2_root - table_root) * 1e9;
  const double err1_nm = std::abs(fit1_root - 1293e-9) * 1e9;

  Check c;
  c.pass = err2_nm < 0.1 && err1_nm <= 1.0;
  c.detail = "quadratic-fit root off table by " + num(err2_nm) +
             " nm (limit 0.1), linear-fit root " + num(fit1_root * 1e9, 6) +
             " nm (1293 +/- 1)";
  return c;
}

// ---------------------------------------------------------------------------
// 6. Power-evolution conservation laws.
Check c6() {
  // Lossless two-channel transfer conserves the photon-flux sum.
  const FibreSpec lossless = uwtest::flat_fibre(0.0, 80e3);
  ChannelGrid pair = make_uniform_grid(2, 13.2e12, 96e9, 193.0e12);
  set_uniform_launch(pair, 10e-3);
  const DistanceGrid zg = build_distance_grid(80e3, 1.0);
  const PowerEvolution evo = solve_power_evolution(lossless, pair, zg, {});

  double flux0 = 0.0;
  for (std::size_t i = 0; i < pair.size(); ++i) flux0 += evo.launch[i] / evo.freq[i];
  double flux_dev = 0.0;
  for (std::size_t m = 0; m < evo.steps(); ++m) {
    double flux = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
      flux += evo.launch[i] * evo.rho(i, m) / evo.freq[i];
    }
    flux_dev = std::max(flux_dev, std::abs(flux / flux0 - 1.0));
  }
  double flux_end = 0.0;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    flux_end += evo.launch[i] * evo.rho_end[i] / evo.freq[i];
  }
  flux_dev = std::max(flux_dev, std::abs(flux_end / flux0 - 1.0));

  // With loss on and the coupling off, every channel decays as exp(-alpha z).
  const FibreSpec fibre = default_fibre();
  ChannelGrid comb = make_uniform_grid(8, 1e12, 96e9, lambda_to_freq(1438e-9));
  set_uniform_launch(comb, dbm_to_watt(0.0));
  RamanSolveOptions off;
  off.include_raman = false;
  const PowerEvolution decay = solve_power_evolution(fibre, comb, zg, off);
  double decay_dev = 0.0;
  for (std::size_t i = 0; i < comb.size(); ++i) {
    const double alpha = attenuation_at(fibre, freq_to_lambda(comb.freq[i]));
    decay_dev = std::max(decay_dev,
                         std::abs(decay.rho_end[i] / std::exp(-alpha * 80e3) - 1.0));
    for (std::size_t m = 0; m < decay.steps(); ++m) {
      const double want = std::exp(-alpha * decay.grid.mid[m]);
      decay_dev = std::max(decay_dev, std::abs(decay.rho(i, m) / want - 1.0));
    }
  }

  Check c;
  c.pass = flux_dev <= 1e-6 && decay_dev <= 1e-6;
  c.detail = "photon-flux drift " + num(flux_dev) + " rel (limit 1e-6), pure-loss drift " +
             num(decay_dev) + " rel (limit 1e-6)";
  return c;
}

// ---------------------------------------------------------------------------
// 7. Split-step simulator self-checks.
Check c7() {
  // (a) Zero nonlinearity reduces to the analytic linear filter.
  const FibreSpec fibre = uwtest::flat_fibre(0.2, 50e3);
  ChannelGrid grid = make_uniform_grid(2, 100e9, 96e9, 193.4e12);
  set_uniform_launch(grid, 1e-3);
  SsfmConfig lin;
  lin.symbols_per_channel = 512;
  lin.samples_per_symbol = 4;
  lin.gamma_override = 0.0;
  lin.fixed_step_m = 500.0;
  lin.rng_seed = 3;
  const SsfmSignal sig = generate_waveform(grid, lin);
  const FieldState out = propagate(sig.field, fibre, lin);

  const std::size_t n = sig.field.ex.size();
  const BetaCoefficients b =
      beta_from_dispersion(fibre.dispersion, freq_to_lambda(sig.field.centre));
  std::vector<std::complex<double>> wx = sig.field.ex, wy = sig.field.ey;
  FftPlan plan(n);
  plan.forward(wx);
  plan.forward(wy);
  const double len = fibre.length_m;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = bin_frequency(k, n, sig.field.fs);
    const double w = 2.0 * kPi * f;
    const double phase = -(0.5 * b.beta2 * w * w + b.beta3 * w * w * w / 6.0 +
                           b.beta4 * w * w * w * w / 24.0) *
                         len;
    const double amp =
        std::exp(-0.5 * attenuation_at(fibre, freq_to_lambda(sig.field.centre + f)) * len);
    const std::complex<double> m{amp * std::cos(phase), amp * std::sin(phase)};
    wx[k] *= m;
    wy[k] *= m;
  }
  plan.inverse(wx);
  plan.inverse(wy);
  double err2 = 0.0, want2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    err2 += std::norm(out.ex[k] - wx[k]) + std::norm(out.ey[k] - wy[k]);
    want2 += std::norm(wx[k]) + std::norm(wy[k]);
  }
  const double linear_err = std::sqrt(err2 / want2);

  // (b) Continuous-wave field picks up the polarisation-averaged Kerr phase.
  const FibreSpec cw_fibre = uwtest::flat_fibre(0.0, 40e3);
  const double p_cw = 5e-3;
  const double amp_pol = std::sqrt(0.5 * p_cw);
  FieldState cw;
  cw.ex.assign(1024, {amp_pol, 0.0});
  cw.ey.assign(1024, {amp_pol, 0.0});
  cw.fs = 100e9;
  cw.centre = 193.4e12;
  SsfmConfig cw_cfg;
  cw_cfg.symbols_per_channel = 256;
  cw_cfg.samples_per_symbol = 4;
  cw_cfg.gamma_override = 2e-3;
  cw_cfg.goal_local_error = 1e-6;
  const FieldState cw_out = propagate(cw, cw_fibre, cw_cfg);
  const double theta = -(8.0 / 9.0) * 2e-3 * p_cw * 40e3;
  const std::complex<double> want{amp_pol * std::cos(theta), amp_pol * std::sin(theta)};
  double cw_err = 0.0;
  for (std::size_t k = 0; k < cw_out.ex.size(); ++k) {
    cw_err = std::max(cw_err, std::abs(cw_out.ex[k] - want) / std::abs(want));
    cw_err = std::max(cw_err, std::abs(cw_out.ey[k] - want) / std::abs(want));
  }

  // (c) Fixed-step global error falls off quadratically with the step.
  const FibreSpec nl_fibre = uwtest::flat_fibre(0.0, 10e3);
  ChannelGrid one = make_uniform_grid(1, 100e9, 96e9, 193.4e12);
  set_uniform_launch(one, 10e-3);
  SsfmConfig slope_cfg;
  slope_cfg.symbols_per_channel = 512;
  slope_cfg.samples_per_symbol = 4;
  slope_cfg.gamma_override = 2e-3;
  slope_cfg.rng_seed = 5;
  const SsfmSignal nl_sig = generate_waveform(one, slope_cfg);
  auto run_fixed = [&](double h) {
    SsfmConfig cfg = slope_cfg;
    cfg.fixed_step_m = h;
    return propagate(nl_sig.field, nl_fibre, cfg);
  };
  const FieldState ref = run_fixed(25.0);
  auto err_vs_ref = [&](const FieldState& f) {
    double e2 = 0.0, r2 = 0.0;
    for (std::size_t k = 0; k < ref.ex.size(); ++k) {
      e2 += std::norm(f.ex[k] - ref.ex[k]) + std::norm(f.ey[k] - ref.ey[k]);
      r2 += std::norm(ref.ex[k]) + std::norm(ref.ey[k]);
    }
    return std::sqrt(e2 / r2);
  };
  const double e400 = err_vs_ref(run_fixed(400.0));
  const double e100 = err_vs_ref(run_fixed(100.0));
  const double slope = 0.5 * std::log2(e400 / e100);

  Check c;
  c.pass = linear_err <= 1e-10 && cw_err <= 1e-8 && slope >= 1.7 && slope <= 2.3;
  c.detail = "linear-filter mismatch " + num(linear_err) + " (limit 1e-10), CW phase error " +
             num(cw_err) + " (limit 1e-8), step-halving slope " + num(slope) + " (1.7..2.3)";
  return c;
}

// ---------------------------------------------------------------------------
// 8. Launch-power optimiser on a 38-channel C-band link.
Check c8() {
  const FibreSpec fibre = default_fibre();
  ChannelGrid grid = make_uniform_grid(38, 100e9, 96e9, lambda_to_freq(1547.5e-9));
  set_uniform_launch(grid, dbm_to_watt(0.0));
  BandPlan plan;
  plan.bands = {{"C", 1.52e-6, 1.576e-6, 5.0, 1.5e12}};

  LinkConfig cfg;
  GnSolverConfig coarse;
  coarse.n_r = 64;
  coarse.mean_step_density = 0.8;
  coarse.workers = 1;
  GnSolverConfig fine;
  fine.n_r = 100;
  fine.mean_step_density = 1.0;
  fine.workers = 1;
  cfg.gn = fine;
  cfg.phases = {coarse, fine};
  cfg.lbfgs.grad_tol = 0.01;
  cfg.lbfgs.max_iterations = 100;

  cfg.uniform_mode = true;
  const auto t0 = std::chrono::steady_clock::now();
  const OptimiseOutcome uni = optimise_launch_powers(fibre, grid, plan, cfg, 0.0);
  const double wall_uniform = seconds_since(t0);

  cfg.uniform_mode = false;
  const OptimiseOutcome seg = optimise_launch_powers(fibre, grid, plan, cfg, 0.0);

  bool within_bounds = true;
  for (const OptimiseOutcome* out : {&uni, &seg}) {
    for (double e : out->profile.flatten()) {
      within_bounds = within_bounds && e >= cfg.bound_lo_dbm - 1e-9 && e <= cfg.bound_hi_dbm + 1e-9;
    }
    for (double x : out->solver.x) {
      within_bounds = within_bounds && x >= cfg.bound_lo_dbm - 1e-9 && x <= cfg.bound_hi_dbm + 1e-9;
    }
  }
  const double gap = seg.report.total_capacity / uni.report.total_capacity;

  Check c;
  c.pass = uni.solver.converged && uni.solver.max_proj_grad <= 0.01 && wall_uniform < 600.0 &&
           gap >= 0.999 && gap <= 1.02 && within_bounds;
  c.detail = std::string("uniform converged=") + (uni.solver.converged ? "yes" : "no") +
             " max|grad| " + num(uni.solver.max_proj_grad) + " (<=0.01) in " + num(wall_uniform) +
             " s (<600), segmented/uniform capacity " + num(gap, 6) + " (0.999..1.02), bounds " +
             (within_bounds ? "held" : "VIOLATED");
  return c;
}

// ---------------------------------------------------------------------------
// 9. Closed-form model: mismatch-coefficient algebra and the near-zero-
//    dispersion undershoot against the integral model.
Check c9() {
  const double b2 = -2e-26, b3 = 8e-41, b4 = -3e-55;
  const double fi = -1.7e12, fk = 0.9e12;
  const double pi = kPi;

  bool algebra = true;
  auto close = [](double a, double b) {
    return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
  };
  algebra = algebra && phi_xpm(fi, fi, {b2, b3, b4}) == 0.0;
  algebra = algebra && close(phi_xpm(fi, fk, {b2, 0.0, 0.0}),
                             -4.0 * pi * pi * (fk - fi) * b2);
  algebra = algebra && close(phi_xpm(fi, fk, {0.0, b3, 0.0}),
                             -4.0 * pi * pi * (fk - fi) * pi * b3 * (fi + fk));
  algebra = algebra && close(phi_xpm(fi, fk, {0.0, 0.0, b4}),
                             -4.0 * pi * pi * (fk - fi) * (2.0 * pi * pi / 3.0) * b4 *
                                 (fi * fi + fi * fk + fk * fk));
  algebra = algebra && close(phi_spm(fi, {b2, 0.0, 0.0}), -4.0 * pi * pi * b2);
  algebra = algebra && close(phi_spm(fi, {0.0, b3, 0.0}), -4.0 * pi * pi * 2.0 * pi * b3 * fi);
  algebra = algebra &&
            close(phi_spm(fi, {0.0, 0.0, b4}), -4.0 * pi * pi * 2.0 * pi * pi * b4 * fi * fi);

  const FibreSpec fibre = default_fibre();
  ChannelGrid grid = make_uniform_grid(5, 100e9, 96e9, lambda_to_freq(1302.3e-9));
  set_uniform_launch(grid, dbm_to_watt(2.0));
  const BetaCoefficients betas =
      beta_from_dispersion(fibre.dispersion, freq_to_lambda(grid.centre));
  const DistanceGrid zg = build_distance_grid(fibre.length_m, 1.4);
  const std::vector<PowerEvolution> spans{solve_power_evolution(fibre, grid, zg, {})};
  GnSolverConfig cfg;
  cfg.n_r = 150;
  cfg.mean_step_density = 1.4;
  cfg.workers = 1;
  const NliResult full = all_channels_nli(grid, spans, betas, fibre, cfg);
  const NliResult cfm = cfm_all_channels_nli(grid, spans, betas, fibre);

  std::size_t worst = 0;
  double worst_gap = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double gap = std::abs(10.0 * std::log10(cfm.eta[i] / full.eta[i]));
    if (gap > worst_gap) {
      worst_gap = gap;
      worst = i;
    }
  }
  const bool undershoots = cfm.eta[worst] < full.eta[worst];

  Check c;
  c.pass = algebra && undershoots;
  c.detail = std::string("mismatch algebra ") + (algebra ? "exact" : "BROKEN") +
             ", worst-channel closed-form vs integral gap " + num(worst_gap) + " dB (" +
             (undershoots ? "undershoots as required" : "OVERSHOOTS") + ")";
  return c;
}

// ---------------------------------------------------------------------------
// 10. Byte-identical CSV output across worker counts and reruns.
Check c10() {
  const fs::path dir =
      fs::temp_directory_path() / ("uwblink_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  fs::create_directories(dir / "c");

  const fs::path scen = dir / "det.json";
  {
    std::ofstream out(scen);
    out << "{\"name\":\"det\","
           "\"grid\":{\"channels\":5,\"spacing_ghz\":100,\"symbol_rate_ghz\":96,"
           "\"centre_nm\":1550,\"guards\":\"none\",\"launch_dbm\":0},"
           "\"fibre\":{\"length_km\":80,\"spans\":1},"
           "\"raman_enabled\":true,"
           "\"solver\":{\"n_r\":32,\"step_density_per_km\":0.5}}";
  }

  auto run = [&](const std::string& args) {
    const std::string cmd =
        std::string("\"") + UWBLINK_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string scen_arg = "--scenario \"" + scen.string() + "\" ";

  bool ok = true;
  ok = ok && run(scen_arg + "--out-dir \"" + (dir / "a").string() + "\" --workers 1 nli") == 0;
  ok = ok && run(scen_arg + "--out-dir \"" + (dir / "b").string() + "\" --workers 4 nli") == 0;
  ok = ok && run(scen_arg + "--out-dir \"" + (dir / "c").string() + "\" --workers 4 nli") == 0;
  const std::string nli_a = slurp(dir / "a" / "det_nli_integral.csv");
  const bool nli_same = ok && !nli_a.empty() &&
                        nli_a == slurp(dir / "b" / "det_nli_integral.csv") &&
                        nli_a == slurp(dir / "c" / "det_nli_integral.csv");

  ok = ok && run(scen_arg + "--out-dir \"" + (dir / "a").string() + "\" power-evolution") == 0;
  ok = ok && run(scen_arg + "--out-dir \"" + (dir / "b").string() + "\" power-evolution") == 0;
  const std::string evo_a = slurp(dir / "a" / "det_power_evolution.csv");
  const bool evo_same = ok && !evo_a.empty() && evo_a == slurp(dir / "b" / "det_power_evolution.csv");

  std::error_code ec;
  fs::remove_all(dir, ec);

  Check c;
  c.pass = ok && nli_same && evo_same;
  c.detail = std::string("cli runs ") + (ok ? "clean" : "FAILED") + ", distortion CSV " +
             (nli_same ? "identical across workers 1/4 and rerun" : "DIFFERS") +
             ", power CSV " + (evo_same ? "identical across reruns" : "DIFFERS");
  return c;
}

using CheckFn = Check (*)();
constexpr CheckFn kChecks[] = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> todo;
  if (argc < 2 || std::string(argv[1]) == "all") {
    for (int i = 1; i <= 10; ++i) todo.push_back(i);
  } else {
    const int k = std::atoi(argv[1]);
    if (k < 1 || k > 10) {
      std::fprintf(stderr, "usage: %s <1..10|all>\n", argv[0]);
      return 2;
    }
    todo.push_back(k);
  }

  bool all_pass = true;
  for (int k : todo) {
    Check c;
    try {
      c = kChecks[k - 1]();
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    std::printf("C%d %s: %s\n", k, c.pass ? "PASS" : "FAIL", c.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && c.pass;
  }
  return all_pass ? 0 : 1;
}
