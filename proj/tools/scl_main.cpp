// Command line driver for the semiclassical control library.
//
// Subcommands:
//   synthesize        run the full control synthesis pipeline for a scenario
//   simulate-limit    integrate the limit system for a scenario (no control)
//   simulate-nls      integrate the semiclassical Schrodinger flow
//   verify-identities tabulate the bracket identity residuals
//   convergence       parameter sweeps (axis: dt, hbar, grid, osc, N)
//   run-acceptance    run the acceptance criteria and write acceptance.json

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scl/acceptance.hpp"
#include "scl/harness.hpp"

namespace fs = std::filesystem;

namespace {

fs::path resolve_out_dir(const std::string& cli_value) {
  if (!cli_value.empty()) return fs::path(cli_value);
  if (const char* env = std::getenv("SCL_OUT_DIR")) {
    if (*env != '\0') return fs::path(env);
  }
  return fs::path("out");
}

scl::Scenario load_checked(const std::string& config_path, std::uint64_t seed_override,
                           bool seed_given) {
  scl::Scenario sc = scl::load_scenario_file(config_path);
  if (seed_given) sc.seed = seed_override;
  return sc;
}

int cmd_synthesize(const std::string& config_path, const std::string& out_dir,
                   std::uint64_t seed, bool seed_given) {
  scl::Scenario sc = load_checked(config_path, seed, seed_given);
  fs::path base = resolve_out_dir(out_dir);
  scl::json summary = scl::run_scenario(sc, base);
  std::cout << summary.dump(2) << "\n";
  return summary.value("target_met", false) ? 0 : 2;
}

int cmd_simulate_limit(const std::string& config_path, const std::string& out_dir,
                       std::uint64_t seed, bool seed_given) {
  scl::Scenario sc = load_checked(config_path, seed, seed_given);
  const int n = sc.grid_n();

  scl::SystemInput input;
  input.init = scl::limit_initial_state(sc);
  input.xi = scl::zero_signal(n);
  input.zeta = scl::zero_signal(n);
  input.eta = scl::zero_signal(n);

  scl::SolverConfig cfg;
  cfg.T = sc.spec.T;
  scl::Trajectory traj = scl::solve_limit(input, cfg);

  fs::path dir = scl::make_run_dir(resolve_out_dir(out_dir), sc.name + "-limit",
                                   scl::config_text(sc.raw));
  scl::write_trajectory_log(dir / "runlog.jsonl", traj);
  const scl::LimitState& fin = traj.terminal();
  scl::write_fields_csv(dir / "fields" / "terminal.csv",
                        {"rho0", "u0", "A", "rho1", "u1"},
                        {&fin.rho0, &fin.u0, &fin.A, &fin.rho1, &fin.u1});

  std::cout << "limit run: steps=" << traj.steps
            << " min_rho0=" << traj.min_rho0_seen
            << " mass0_drift=" << std::abs(traj.mass0.back() - traj.mass0.front())
            << "\nartefacts: " << dir.string() << "\n";
  return 0;
}

int cmd_simulate_nls(const std::string& config_path, const std::string& out_dir,
                     double hbar_override, bool hbar_given,
                     std::uint64_t seed, bool seed_given) {
  scl::Scenario sc = load_checked(config_path, seed, seed_given);
  const double hbar = hbar_given ? hbar_override : sc.hbar;

  scl::ComplexField psi0 = scl::nls_initial_psi(sc, hbar);
  scl::NlsConfig cfg;
  cfg.T = sc.spec.T;
  cfg.dt_scale = sc.nls_dt_scale;
  scl::NlsTrajectory traj = scl::solve_nls(psi0, scl::zero_signal(sc.grid_n()), hbar, cfg);

  fs::path dir = scl::make_run_dir(resolve_out_dir(out_dir), sc.name + "-nls",
                                   scl::config_text(sc.raw));
  scl::Observables obs = scl::extract_observables(traj.terminal(), hbar);
  scl::write_fields_csv(dir / "fields" / "terminal.csv", {"rho", "u"}, {&obs.rho, &obs.u});

  scl::CsvWriter mass_csv(dir / "mass.csv", {"t", "mass"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    mass_csv.numeric_row({traj.times[i], traj.mass[i]});
  }

  std::cout << "nls run: hbar=" << hbar << " steps=" << traj.steps
            << " mass_drift=" << std::abs(traj.mass.back() - traj.mass.front())
            << "\nartefacts: " << dir.string() << "\n";
  return 0;
}

int cmd_verify_identities(const std::string& out_dir, int max_level) {
  fs::path base = resolve_out_dir(out_dir);
  fs::create_directories(base);
  scl::JsonLinesLogger log(base / "identities.jsonl");

  double worst = 0.0;
  std::cout << "level  mode        residual\n";
  for (int n = 0; n <= max_level; ++n) {
    for (int q = 1; q <= n + 2; ++q) {
      for (int is_sin = 0; is_sin < 2; ++is_sin) {
        scl::TrigPolynomial psi = is_sin ? scl::TrigPolynomial::sin_mode(q)
                                         : scl::TrigPolynomial::cos_mode(q);
        scl::BracketDecomposition dec = scl::decompose_mode(psi, n);
        double r = scl::mode_identity_residual(psi, dec);
        worst = std::max(worst, r);
        std::string mode = (is_sin ? "sin " : "cos ") + std::to_string(q);
        std::printf("%5d  %-10s  %.3e\n", n, mode.c_str(), r);
        log.log({{"kind", "mode"}, {"level", n}, {"mode", mode}, {"residual", r}});
      }
    }
  }

  std::mt19937_64 rng(12345);
  auto unit = [&rng]() { return 2.0 * std::ldexp(static_cast<double>(rng() >> 11), -53) - 1.0; };
  for (int draw = 0; draw < 10; ++draw) {
    int n = static_cast<int>(rng() % 5);
    scl::TrigPair zeta;
    for (int q = 1; q <= n + 2; ++q) {
      zeta.a.add_sin(q, unit());
      zeta.a.add_cos(q, unit());
      zeta.b.add_sin(q, unit());
      zeta.b.add_cos(q, unit());
    }
    scl::PairedDecomposition dec = scl::decompose_pair(zeta, n);
    double r = scl::pair_identity_residual(zeta, dec);
    worst = std::max(worst, r);
    std::printf("%5d  pair #%-4d  %.3e\n", n, draw, r);
    log.log({{"kind", "pair"}, {"level", n}, {"draw", draw}, {"residual", r}});
  }

  std::cout << "worst residual: " << worst << "\n";
  return worst <= 1e-12 ? 0 : 1;
}

int cmd_convergence(const std::string& config_path, const std::string& out_dir,
                    const std::string& axis, int jobs,
                    std::uint64_t seed, bool seed_given) {
  scl::Scenario sc = load_checked(config_path, seed, seed_given);
  scl::ConvergenceTable table = scl::convergence_study(sc, axis, jobs);

  fs::path base = resolve_out_dir(out_dir);
  fs::create_directories(base);
  fs::path csv = base / ("convergence_" + axis + ".csv");
  scl::write_convergence_csv(csv, table);

  std::cout << "axis=" << table.axis << "\n";
  for (const auto& row : table.rows) {
    std::cout << "  " << row.param << "  ->  " << row.value << "\n";
  }
  std::cout << "written: " << csv.string() << "\n";
  return 0;
}

int cmd_run_acceptance(const std::string& out_dir) {
  scl::AcceptanceOutcome outcome = scl::run_acceptance();
  int k = 0;
  for (const auto& r : outcome.results) {
    ++k;
    std::printf("[%2d/12] %s  %-24s measured=%.6e tol=%.6e\n", k,
                r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.tolerance);
  }
  fs::path base = resolve_out_dir(out_dir);
  fs::create_directories(base);
  scl::write_json(base / "acceptance.json", outcome.report);
  std::cout << (outcome.all_pass ? "ALL PASS" : "FAILURES PRESENT") << "\n";
  return outcome.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiclassical control library driver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string axis = "dt";
  int jobs = 1;
  int max_level = 6;
  double hbar_override = 0.0;
  std::uint64_t seed_override = 0;

  auto* syn = app.add_subcommand("synthesize", "run the control synthesis pipeline");
  syn->add_option("--config", config_path, "scenario file")->required();
  syn->add_option("--out", out_dir, "output directory");
  auto* syn_seed = syn->add_option("--seed", seed_override, "rng seed override");

  auto* lim = app.add_subcommand("simulate-limit", "integrate the limit system");
  lim->add_option("--config", config_path, "scenario file")->required();
  lim->add_option("--out", out_dir, "output directory");
  auto* lim_seed = lim->add_option("--seed", seed_override, "rng seed override");

  auto* nls = app.add_subcommand("simulate-nls", "integrate the Schrodinger flow");
  nls->add_option("--config", config_path, "scenario file")->required();
  nls->add_option("--out", out_dir, "output directory");
  auto* nls_hbar = nls->add_option("--hbar", hbar_override, "semiclassical parameter");
  auto* nls_seed = nls->add_option("--seed", seed_override, "rng seed override");

  auto* ver = app.add_subcommand("verify-identities", "bracket identity residual table");
  ver->add_option("--out", out_dir, "output directory");
  ver->add_option("--max-level", max_level, "largest span level to tabulate");

  auto* conv = app.add_subcommand("convergence", "parameter sweep study");
  conv->add_option("--config", config_path, "scenario file")->required();
  conv->add_option("--axis", axis, "dt | hbar | grid | osc | N");
  conv->add_option("--out", out_dir, "output directory");
  conv->add_option("--jobs", jobs, "worker threads");
  auto* conv_seed = conv->add_option("--seed", seed_override, "rng seed override");

  auto* acc = app.add_subcommand("run-acceptance", "run the acceptance criteria");
  acc->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (syn->parsed()) {
      return cmd_synthesize(config_path, out_dir, seed_override, !syn_seed->empty());
    }
    if (lim->parsed()) {
      return cmd_simulate_limit(config_path, out_dir, seed_override, !lim_seed->empty());
    }
    if (nls->parsed()) {
      return cmd_simulate_nls(config_path, out_dir, hbar_override, !nls_hbar->empty(),
                              seed_override, !nls_seed->empty());
    }
    if (ver->parsed()) return cmd_verify_identities(out_dir, max_level);
    if (conv->parsed()) {
      return cmd_convergence(config_path, out_dir, axis, jobs, seed_override,
                             !conv_seed->empty());
    }
    if (acc->parsed()) return cmd_run_acceptance(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
