#pragma once

// Scenario loading and experiment orchestration: a scenario file fixes the
// grid, the endpoint data, the synthesis parameters and the semiclassical
// settings; the harness runs the pipeline, writes the run artefacts, and
// drives parameter sweeps for convergence studies.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "scl/config.hpp"
#include "scl/grenier.hpp"
#include "scl/io.hpp"
#include "scl/limit_system.hpp"
#include "scl/nls.hpp"
#include "scl/synthesis.hpp"

namespace scl {

struct Scenario {
  std::string name;
  TargetSpec spec;
  PeriodicField theta;  // initial phase of the leading amplitude
  double hbar = 0.0625;
  double nls_dt_scale = 1.0;
  std::uint64_t seed = 12345;
  ConfigMap raw;

  int grid_n() const { return spec.grid_n(); }
};

inline Scenario load_scenario(const ConfigMap& m) {
  Scenario sc;
  sc.raw = m;
  sc.name = get_string(m, "name", "scenario");
  const int n = get_int(m, "grid.n", 256);
  if (!is_pow2(static_cast<std::size_t>(n)) || n < 8)
    throw ConfigError("grid.n: must be a power of two, at least 8");

  sc.spec.T = get_double(m, "time.T", 1.0);
  sc.spec.g0 = field_from_config(m, "spec.g0", n, "const:1.0");
  sc.spec.v0 = field_from_config(m, "spec.v0", n);
  sc.spec.g1 = field_from_config(m, "spec.g1", n);
  sc.spec.v1 = field_from_config(m, "spec.v1", n);
  sc.spec.g0_hat = field_from_config(m, "spec.g0_hat", n, get_string(m, "spec.g0", "const:1.0"));
  sc.spec.v0_hat = field_from_config(m, "spec.v0_hat", n, get_string(m, "spec.v0", "0"));
  sc.spec.g1_hat = field_from_config(m, "spec.g1_hat", n, get_string(m, "spec.g1", "0"));
  sc.spec.v1_hat = field_from_config(m, "spec.v1_hat", n, get_string(m, "spec.v1", "0"));
  sc.theta = field_from_config(m, "spec.theta", n);

  // The phase current of a WKB datum sqrt(g0) e^{i theta} is -g0 d_x theta;
  // an explicit spec.A0 entry overrides it.
  if (has_key(m, "spec.A0")) {
    sc.spec.A0 = field_from_config(m, "spec.A0", n);
  } else {
    const PeriodicField dtheta = derivative(sc.theta);
    sc.spec.A0 = PeriodicField(n);
    for (int j = 0; j < n; ++j) sc.spec.A0.v[j] = -sc.spec.g0.v[j] * dtheta.v[j];
  }

  sc.spec.eps = get_double(m, "synthesis.eps", 5e-2);
  sc.spec.N = get_int(m, "synthesis.N", 1);
  sc.spec.delta = get_double(m, "synthesis.delta", sc.spec.T / 20.0);
  sc.spec.ramp_speed = get_double(m, "synthesis.ramp_speed", 2.0);
  sc.spec.osc_max = get_int(m, "synthesis.osc_max", 32);
  sc.spec.smooth_m = get_int(m, "synthesis.smooth_m", 2);
  sc.spec.nodes = get_int(m, "synthesis.nodes", 4096);

  sc.hbar = get_double(m, "nls.hbar", 0.0625);
  sc.nls_dt_scale = get_double(m, "nls.dt_scale", 1.0);
  sc.seed = static_cast<std::uint64_t>(get_int(m, "seed", 12345));
  sc.spec.validate();
  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  return load_scenario(load_config(path));
}

// WKB initial data consistent with the scenario endpoints: the leading
// amplitude carries the density and phase, the correction is aligned so the
// corrector density 2 Re(conj(a0) a1) equals g1.
inline WKBState wkb_initial_state(const Scenario& sc) {
  const int n = sc.grid_n();
  WKBState w(n);
  for (int j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    const double r = std::sqrt(sc.spec.g0.v[j]);
    const std::complex<double> a0 = r * std::exp(std::complex<double>(0.0, sc.theta.v[j]));
    w.a0.v[js] = a0;
    w.a1.v[js] = (sc.spec.g1.v[j] / (2.0 * sc.spec.g0.v[j])) * a0;
  }
  w.u0 = sc.spec.v0;
  w.u1 = sc.spec.v1;
  return w;
}

inline GrenierState grenier_initial_state(const Scenario& sc, double hbar) {
  const WKBState w = wkb_initial_state(sc);
  const int n = sc.grid_n();
  GrenierState g(n);
  for (int j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    g.a.v[js] = w.a0.v[js] + hbar * w.a1.v[js];
    g.u.v[j] = w.u0.v[j] + hbar * w.u1.v[j];
  }
  return g;
}

inline ComplexField nls_initial_psi(const Scenario& sc, double hbar) {
  const GrenierState g = grenier_initial_state(sc, hbar);
  return grenier_wavefunction(g, hbar);
}

inline LimitState limit_initial_state(const Scenario& sc) {
  LimitState s(sc.grid_n());
  s.rho0 = sc.spec.g0;
  s.u0 = sc.spec.v0;
  s.A = sc.spec.A0;
  s.rho1 = sc.spec.g1;
  s.u1 = sc.spec.v1;
  return s;
}

inline json report_to_json(const SynthesisReport& r) {
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back(json{{"level", s.level},
                          {"osc", s.osc},
                          {"segments", s.segments},
                          {"gap", s.gap},
                          {"tol", s.tol},
                          {"rho_deviation", s.rho_deviation},
                          {"terminal_error", s.terminal_error}});
  }
  return json{{"pre_projection_residual", r.pre_projection_residual},
              {"stageN_terminal_error", r.stageN_terminal_error},
              {"stages", stages},
              {"final_error", r.final_error},
              {"target_met", r.target_met}};
}

inline void write_trajectory_log(const std::filesystem::path& path, const Trajectory& traj) {
  JsonLinesLogger log(path);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const LimitState& s = traj.states[i];
    const double dt = i ? traj.times[i] - traj.times[i - 1] : 0.0;
    log.log(json{{"t", traj.times[i]},
                 {"min_rho0", min_value(s.rho0)},
                 {"norm_rho0_H3", sobolev_norm(s.rho0, 3)},
                 {"norm_u0_H3", sobolev_norm(s.u0, 3)},
                 {"norm_A_H2", sobolev_norm(s.A, 2)},
                 {"norm_rho1_H1", sobolev_norm(s.rho1, 1)},
                 {"norm_u1_H1", sobolev_norm(s.u1, 1)},
                 {"mass0", traj.mass0[i]},
                 {"mass1", traj.mass1[i]},
                 {"dt", dt}});
  }
}

// Runs the synthesis pipeline for a scenario, verifies the result on the
// closed system, and writes report.json, the control coefficients and the
// terminal fields under <out>/runs/<name>-<hash>/.
inline json run_scenario(const Scenario& sc, const std::filesystem::path& out_base) {
  const auto [controls, report] = full_pipeline(sc.spec);

  SystemInput in;
  in.init = limit_initial_state(sc);
  in.eta = controls.eta;
  SolverConfig cfg = synthesis_solver_config(sc.spec);
  const Trajectory traj = solve_limit(in, cfg);

  const std::filesystem::path dir = make_run_dir(out_base, sc.name, config_text(sc.raw));
  write_trajectory_log(dir / "runlog.jsonl", traj);

  {
    std::vector<double> times;
    std::vector<TrigPair> values;
    const int samples = 512;
    for (int i = 0; i <= samples; ++i) {
      const double t = sc.spec.T * i / samples;
      const FieldPair v = controls.eta->at(t);
      times.push_back(t);
      values.emplace_back(poly_from_field(v.a, sc.spec.N + 2), poly_from_field(v.b, sc.spec.N + 2));
    }
    write_control_csv(dir / "controls" / "control.csv", times, values);
  }
  {
    const LimitState& s = traj.terminal();
    write_fields_csv(dir / "fields" / "terminal.csv",
                     {"rho0", "u0", "A", "rho1", "u1", "rho0_target", "u0_target", "rho1_target",
                      "u1_target"},
                     {&s.rho0, &s.u0, &s.A, &s.rho1, &s.u1, &sc.spec.g0_hat, &sc.spec.v0_hat,
                      &sc.spec.g1_hat, &sc.spec.v1_hat});
  }

  json out = report_to_json(report);
  out["scenario"] = sc.name;
  out["grid_n"] = sc.grid_n();
  out["verified_terminal_error"] = target_error(traj.terminal(), sc.spec);
  out["min_rho0_seen"] = traj.min_rho0_seen;
  out["run_dir"] = dir.string();
  write_json(dir / "report.json", out);
  return out;
}

// ------------------------------------------------------- convergence sweeps

struct ConvergenceRow {
  double param = 0.0;
  double value = 0.0;
};

struct ConvergenceTable {
  std::string axis;
  std::vector<ConvergenceRow> rows;
};

namespace detail {

template <typename F>
void parallel_for(int jobs, int count, F&& body) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

// Parameter sweeps along one axis. "dt" and "grid" measure self-convergence
// against a finer reference, "hbar" measures the distance of the
// semiclassical amplitude to the leading order, "osc" the reduction gap at
// fixed oscillation counts, "N" the pipeline error per synthesis level.
inline ConvergenceTable convergence_study(const Scenario& sc, const std::string& axis, int jobs) {
  ConvergenceTable table;
  table.axis = axis;

  if (axis == "dt") {
    const StageControls stage = stageN_controls(sc.spec);
    const ComplexField psi0 = nls_initial_psi(sc, sc.hbar);
    const std::vector<double> scales{1.0, 0.5, 0.25, 0.125, 0.0625};
    NlsConfig ref_cfg;
    ref_cfg.T = sc.spec.T;
    ref_cfg.dt_scale = sc.nls_dt_scale * 0.03125;
    ref_cfg.store_target = 2;
    const ComplexField ref = solve_nls(psi0, stage.eta, sc.hbar, ref_cfg).terminal();
    table.rows.resize(scales.size());
    detail::parallel_for(jobs, static_cast<int>(scales.size()), [&](int i) {
      NlsConfig cfg = ref_cfg;
      cfg.dt_scale = sc.nls_dt_scale * scales[static_cast<std::size_t>(i)];
      const ComplexField psi = solve_nls(psi0, stage.eta, sc.hbar, cfg).terminal();
      ComplexField d(psi.n);
      for (std::size_t j = 0; j < d.v.size(); ++j) d.v[j] = psi.v[j] - ref.v[j];
      table.rows[static_cast<std::size_t>(i)] = {scales[static_cast<std::size_t>(i)], l2_norm(d)};
    });
    return table;
  }

  if (axis == "hbar") {
    const StageControls stage = stageN_controls(sc.spec);
    const WKBState w0 = wkb_initial_state(sc);
    NlsConfig cfg;
    cfg.T = sc.spec.T;
    cfg.store_target = 2;
    const WKBState wT = solve_wkb(w0, stage.eta, cfg).terminal();
    const std::vector<double> hbars{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    table.rows.resize(hbars.size());
    detail::parallel_for(jobs, static_cast<int>(hbars.size()), [&](int i) {
      const double hb = hbars[static_cast<std::size_t>(i)];
      const GrenierState gT =
          solve_grenier(grenier_initial_state(sc, hb), stage.eta, hb, cfg).terminal();
      ComplexField d(gT.n());
      for (std::size_t j = 0; j < d.v.size(); ++j) d.v[j] = gT.a.v[j] - wT.a0.v[j];
      table.rows[static_cast<std::size_t>(i)] = {hb, l2_norm(d)};
    });
    return table;
  }

  if (axis == "grid") {
    const std::vector<int> grids{32, 64, 128};
    const int ref_n = 256;
    auto solve_at = [&](int n) {
      ConfigMap m = sc.raw;
      m["grid.n"] = std::to_string(n);
      const Scenario fine = load_scenario(m);
      const StageControls stage = stageN_controls(fine.spec);
      SystemInput in;
      in.init = limit_initial_state(fine);
      in.eta = stage.eta;
      return solve_limit(in, synthesis_solver_config(fine.spec)).terminal();
    };
    const LimitState ref = solve_at(ref_n);
    table.rows.resize(grids.size());
    detail::parallel_for(jobs, static_cast<int>(grids.size()), [&](int i) {
      const int n = grids[static_cast<std::size_t>(i)];
      const LimitState s = solve_at(n);
      const int stride = ref_n / n;
      double err = 0.0;
      for (int j = 0; j < n; ++j) {
        const double d = s.rho0.v[j] - ref.rho0.v[j * stride];
        err += d * d;
      }
      table.rows[static_cast<std::size_t>(i)] = {static_cast<double>(n),
                                                 std::sqrt(kTwoPi * err / n)};
    });
    return table;
  }

  if (axis == "osc") {
    if (sc.spec.N < 1) throw ConfigError("convergence axis 'osc' needs synthesis.N >= 1");
    const StageControls stage = stageN_controls(sc.spec);
    std::vector<int> oscs;
    for (int o = 4; o <= sc.spec.osc_max; o *= 2) oscs.push_back(o);
    table.rows.resize(oscs.size());
    detail::parallel_for(jobs, static_cast<int>(oscs.size()), [&](int i) {
      const StageControls red = reduce_stage(stage, sc.spec, sc.spec.N - 1,
                                             oscs[static_cast<std::size_t>(i)], sc.spec.smooth_m,
                                             false);
      table.rows[static_cast<std::size_t>(i)] = {static_cast<double>(oscs[static_cast<std::size_t>(i)]),
                                                 red.gap};
    });
    return table;
  }

  if (axis == "N") {
    std::vector<int> levels;
    for (int N = 1; N <= sc.spec.N; ++N) levels.push_back(N);
    table.rows.resize(levels.size());
    detail::parallel_for(jobs, static_cast<int>(levels.size()), [&](int i) {
      TargetSpec spec = sc.spec;
      spec.N = levels[static_cast<std::size_t>(i)];
      const auto [controls, report] = full_pipeline(spec);
      table.rows[static_cast<std::size_t>(i)] = {static_cast<double>(spec.N), report.final_error};
    });
    return table;
  }

  throw ConfigError("convergence axis must be one of: N, osc, hbar, dt, grid");
}

inline void write_convergence_csv(const std::filesystem::path& path, const ConvergenceTable& t) {
  CsvWriter w(path, {t.axis, "error"});
  for (const auto& r : t.rows) w.numeric_row({r.param, r.value});
}

}  // namespace scl
