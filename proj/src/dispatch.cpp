#include "vg/dispatch.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "vg/experiments.hpp"
#include "vg/io.hpp"
#include "vg/rigidity.hpp"
#include "vg/steady.hpp"

namespace vg {

namespace {

namespace fs = std::filesystem;

struct Context {
  const RunConfig& cfg;
  CasimirSpec spec;
  fs::path profiles;

  fs::path profile(const std::string& name) {
    if (profiles.empty()) {
      profiles = cfg.directory / "profiles";
      fs::create_directories(profiles);
    }
    return profiles / name;
  }
};

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions opt;
  opt.n = cfg.n;
  opt.support_fraction = 1.0 / cfg.r_max_ratio;
  opt.tab.speed_nodes = cfg.m;
  opt.tab.speed_margin = cfg.u_max_ratio;
  return opt;
}

GroundState solve_state(const Context& ctx, const ModelParams& model) {
  const RunConfig& cfg = ctx.cfg;
  return solve_targets(ctx.spec, model, SolveTargets{cfg.m1, cfg.mj, cfg.tol}, solve_options(cfg));
}

void write_profiles(Context& ctx, const GroundState& st) {
  if (ctx.cfg.write_csv) {
    write_csv(st.phi, ctx.profile("phi.csv"));
    write_csv(st.rho, ctx.profile("rho.csv"));
  }
  if (ctx.cfg.write_phase) write_csv(st.f, ctx.profile("f.csv"));
}

DynamicsOptions dynamics_options(const RunConfig& cfg) {
  DynamicsOptions opt;
  opt.n = cfg.n_particles.value_or(opt.n);
  opt.t_end_dyn = cfg.t_end;
  opt.dt_fraction = cfg.dt.value_or(opt.dt_fraction);
  opt.seed = cfg.seed;
  opt.bins = cfg.bins;
  return opt;
}

Json run_check_casimir(Context& ctx) {
  const CasimirCheck check = check_casimir(ctx.spec, static_cast<int>(ctx.cfg.check_samples));
  return Json{{"casimir", ctx.spec.name},
              {"p", json_number(ctx.spec.p)},
              {"p1", json_number(ctx.spec.p1)},
              {"p2", json_number(ctx.spec.p2)},
              {"check", to_json(check)}};
}

Json run_solve(Context& ctx) {
  const GroundState st = solve_state(ctx, ctx.cfg.model);
  write_profiles(ctx, st);
  return Json{{"state", to_json(st)},
              {"support", to_json(support_check(st))},
              {"self_consistency_residual", json_number(self_consistency_residual(st))},
              {"virial_residual", json_number(virial_residual(st))}};
}

Json run_verify(Context& ctx) {
  const fs::path dir = *ctx.cfg.input;
  std::ifstream in(dir / "summary.json");
  if (!in) throw ConfigError("verify: no summary.json in " + dir.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("verify: malformed summary.json: " + std::string(e.what()));
  }
  if (doc.value("command", "") != "solve" || doc.value("status", "") != "ok")
    throw ConfigError("verify: " + dir.string() + " is not a successful solve output");
  std::map<std::string, std::string> recorded;
  for (const auto& [k, v] : doc.at("config").items()) recorded[k] = v.get<std::string>();
  const RunConfig solved = parse_config("solve", recorded);
  const CasimirSpec spec = build_casimir(solved);
  const Json& s = doc.at("result").at("state");
  const RadialGrid grid = RadialGrid::make(s.at("grid").at("r_max").get<double>(), s.at("grid").at("n").get<std::size_t>());
  TabulationOptions tab;
  tab.speed_nodes = solved.m;
  tab.speed_margin = solved.u_max_ratio;
  const GroundState st =
      integrate_state(spec, solved.model, s.at("psi0").get<double>(), s.at("mu").get<double>(), grid, tab);
  const IdentityResiduals id = multiplier_identities(st);
  return Json{{"input", dir.string()},
              {"state", to_json(st)},
              {"identities", to_json(id)},
              {"support", to_json(support_check(st))},
              {"self_consistency_residual", json_number(self_consistency_residual(st))}};
}

Json run_kj(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  KjOptions opt;
  opt.families = cfg.kj_families;
  opt.budget = cfg.kj_budget;
  opt.kind = cfg.model.is_classical() ? QuotientKind::classical : QuotientKind::relativistic;
  Json out;
  if (std::find(opt.families.begin(), opt.families.end(), TrialFamily::ground_state) != opt.families.end()) {
    const GroundState st = solve_state(ctx, cfg.model);
    opt.ground_states.push_back(st.f);
    out["ground_state"] = to_json(st);
  }
  const KjEstimate est = estimate_kj(ctx.spec, cfg.model, opt);
  out["estimate"] = to_json(est);
  out["threshold"] = to_json(threshold_check(cfg.m1, cfg.mj, ctx.spec, cfg.model, est));
  return out;
}

Json run_scan(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  std::vector<std::vector<double>> rows;
  std::size_t failures = 0;
  Json errors = Json::array();
  for (std::size_t k = 0; k < cfg.scan_steps; ++k) {
    const double t = cfg.scan_steps == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(cfg.scan_steps - 1);
    const double value = cfg.scan_from + t * (cfg.scan_to - cfg.scan_from);
    try {
      GroundState st;
      if (cfg.scan_param == "c") {
        st = solve_targets(ctx.spec, ModelParams::relativistic(value), SolveTargets{cfg.m1, cfg.mj, cfg.tol},
                           solve_options(cfg));
      } else {
        const double psi0 = cfg.scan_param == "psi0" ? value : cfg.scan_psi0;
        const double mu = cfg.scan_param == "mu" ? value : cfg.scan_mu;
        const SolveOptions so = solve_options(cfg);
        const RadialGrid g = fitted_grid(ctx.spec, cfg.model, psi0, mu, so.n, so.support_fraction);
        st = integrate_state(ctx.spec, cfg.model, psi0, mu, g, so.tab);
      }
      rows.push_back({value, st.psi0, st.mu, st.lambda, st.m1, st.mj, st.hc, st.r_support, st.rho_center(),
                      virial_residual(st)});
    } catch (const NumericalError& e) {
      ++failures;
      errors.push_back(Json{{"row", k}, {"error", e.what()}});
      const double nan = std::numeric_limits<double>::quiet_NaN();
      rows.push_back({value, nan, nan, nan, nan, nan, nan, nan, nan, nan});
    }
  }
  if (cfg.write_csv)
    write_table({"value", "psi0", "mu", "lambda", "m1", "mj", "hc", "r_support", "rho_center", "virial_residual"},
                rows, ctx.profile("scan.csv"));
  return Json{{"param", cfg.scan_param}, {"rows", rows.size()}, {"failed_rows", failures}, {"errors", errors}};
}

Json run_equimeasure(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const GroundState st = solve_state(ctx, cfg.model);
  const ScalingReport dil = dilate_transform(st.f, cfg.equimeasure_lambda, ctx.spec, cfg.model);
  PhaseDensity doubled = st.f;
  for (double& x : doubled.values()) x *= 2.0;
  std::vector<double> levels(cfg.equimeasure_levels);
  const double top = st.f.sup();
  for (std::size_t k = 0; k < levels.size(); ++k)
    levels[k] = top * static_cast<double>(k + 1) / static_cast<double>(levels.size() + 1);
  const EquimeasureReport same = equimeasure_compare(st.f, dil.transformed, levels);
  const EquimeasureReport scaled = equimeasure_compare(st.f, doubled, levels);
  if (cfg.write_csv) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < levels.size(); ++k)
      rows.push_back({levels[k], same.dist_f[k], same.dist_g[k], scaled.dist_g[k]});
    write_table({"level", "state", "dilate", "doubled"}, rows, ctx.profile("distribution.csv"));
  }
  return Json{{"state", to_json(st)},
              {"lambda", json_number(cfg.equimeasure_lambda)},
              {"dilate", to_json(same)},
              {"doubled", to_json(scaled)}};
}

Json run_froots(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const FRoots roots = f_roots(cfg.model, cfg.froots_a, ctx.spec, cfg.froots_mu0);
  std::vector<std::vector<double>> rows;
  bool convex = true;
  for (int k = 0; k < 64; ++k) {
    const double s = roots.window_lo * std::pow(roots.window_hi / roots.window_lo, k / 63.0);
    const double f2 = f_function_second(cfg.model, cfg.froots_a, ctx.spec, s);
    convex = convex && f2 > 0.0;
    rows.push_back({s, f_function(cfg.model, cfg.froots_a, ctx.spec, s), f2});
  }
  if (cfg.write_csv) write_table({"s", "F", "F_second"}, rows, ctx.profile("f_function.csv"));
  return Json{{"a", json_number(cfg.froots_a)},
              {"mu0", json_number(cfg.froots_mu0)},
              {"roots", to_json(roots)},
              {"convex_on_samples", convex}};
}

Json run_bootstrap(Context& ctx) {
  const BootstrapResult b = bootstrap_exponents(ctx.spec.p, ctx.cfg.bootstrap_q0);
  if (ctx.cfg.write_csv) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < b.q.size(); ++k) rows.push_back({static_cast<double>(k), b.q[k]});
    write_table({"k", "q"}, rows, ctx.profile("bootstrap.csv"));
  }
  return Json{{"p", json_number(ctx.spec.p)}, {"q0", json_number(ctx.cfg.bootstrap_q0)}, {"bootstrap", to_json(b)}};
}

Json run_evolve(Context& ctx) {
  const GroundState st = solve_state(ctx, ctx.cfg.model);
  const ConservationReport rep = conservation_run(st, dynamics_options(ctx.cfg));
  write_diagnostics(rep.records, ctx.cfg.directory / "diagnostics.csv");
  return Json{{"state", to_json(st)}, {"conservation", to_json(rep)}};
}

std::string delta_label(double d) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", d);
  return buf;
}

Json run_stability(Context& ctx) {
  const GroundState st = solve_state(ctx, ctx.cfg.model);
  const StabilityReport rep = stability_experiment(st, ctx.cfg.delta, ctx.cfg.perturbation, dynamics_options(ctx.cfg));
  write_diagnostics(rep.baseline.records, ctx.cfg.directory / "diagnostics.csv");
  for (const auto& run : rep.runs)
    write_diagnostics(run.records, ctx.cfg.directory / ("diagnostics_delta_" + delta_label(run.delta) + ".csv"));
  return Json{{"state", to_json(st)}, {"stability", to_json(rep)}};
}

Json run_blowup(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const GroundState classical = solve_state(ctx, ModelParams::classical());
  const PhaseDensity datum = blowup_datum(classical, cfg.sigma);
  BlowupOptions opt;
  opt.n = cfg.n_particles.value_or(opt.n);
  opt.t_end_dyn = cfg.t_end;
  opt.dt_fraction = cfg.dt.value_or(opt.dt_fraction);
  opt.seed = cfg.seed;
  const BlowupReport run = blowup_experiment(ctx.spec, cfg.model, datum, opt);
  write_diagnostics(run.records, cfg.directory / "diagnostics.csv");
  if (cfg.write_phase) write_csv(datum, ctx.profile("datum.csv"));
  Json out{{"sigma", json_number(cfg.sigma)}, {"profile_state", to_json(classical)}, {"run", to_json(run)}};
  if (!cfg.model.is_classical()) {
    const BlowupReport control = blowup_experiment(ctx.spec, ModelParams::classical(), datum, opt);
    write_diagnostics(control.records, cfg.directory / "diagnostics_classical.csv");
    out["control"] = to_json(control);
    out["dichotomy"] = run.t_concentration.has_value() && !control.t_concentration.has_value();
  }
  return out;
}

Json run_command(Context& ctx) {
  const std::string& c = ctx.cfg.command;
  if (c == "check-casimir") return run_check_casimir(ctx);
  if (c == "solve") return run_solve(ctx);
  if (c == "verify") return run_verify(ctx);
  if (c == "kj") return run_kj(ctx);
  if (c == "scan") return run_scan(ctx);
  if (c == "equimeasure") return run_equimeasure(ctx);
  if (c == "froots") return run_froots(ctx);
  if (c == "bootstrap") return run_bootstrap(ctx);
  if (c == "evolve") return run_evolve(ctx);
  if (c == "stability") return run_stability(ctx);
  if (c == "blowup") return run_blowup(ctx);
  throw ConfigError("unknown command '" + c + "'");
}

}  // namespace

int dispatch(const RunConfig& cfg) {
  try {
    fs::create_directories(cfg.directory);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "vgs: cannot create " << cfg.directory << ": " << e.what() << '\n';
    return kExitConfig;
  }
  Json summary{{"command", cfg.command}, {"status", "ok"}, {"seed", cfg.seed}, {"config", cfg.resolved}};
  int status = kExitOk;
  try {
    Context ctx{cfg, build_casimir(cfg), {}};
    summary["result"] = run_command(ctx);
  } catch (const DomainError& e) {
    status = kExitConfig;
    summary["status"] = "config_error";
    summary["error"] = e.what();
  } catch (const std::exception& e) {
    status = kExitNumerical;
    summary["status"] = "numerical_failure";
    summary["error"] = e.what();
  }
  summary["exit_code"] = status;
  write_json(summary, cfg.directory / "summary.json");
  if (status != kExitOk) std::cerr << "vgs " << cfg.command << ": " << summary["error"].get<std::string>() << '\n';
  return status;
}

int run_cli(int argc, const char* const* argv) {
  RunConfig cfg;
  try {
    cfg = parse_config(argc, argv);
  } catch (const HelpRequest& h) {
    std::cout << h.what();
    return kExitOk;
  } catch (const DomainError& e) {
    std::cerr << "vgs: " << e.what() << '\n';
    return kExitConfig;
  }
  return dispatch(cfg);
}

}  // namespace vg
