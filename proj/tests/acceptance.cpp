// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "vg/experiments.hpp"
#include "vg/rigidity.hpp"
#include "vg/steady.hpp"

using namespace vg;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Case {
  double p, c;
  GroundState state;
  double seconds = 0.0;
};

std::vector<Case> g_cases;
int g_failures = 0;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void criterion(int id, const char* name, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail += std::string(" exception: ") + e.what();
  }
  if (!ok) ++g_failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", ok ? "PASS" : "FAIL", id, name, detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string label(double p, double c) { return fmt("p=%g c=%g", p, c); }

bool ground_states(std::string& out) {
  bool ok = true;
  for (double c : {1.0, kInf})
    for (double p : {1.6, 2.0, 3.0}) {
      const auto t0 = std::chrono::steady_clock::now();
      Case k{p, c, solve_targets(make_polytrope(p), ModelParams{c}, {1.0, 1.0, 1e-8})};
      k.seconds = seconds_since(t0);
      const GroundState& st = k.state;
      const SupportReport sup = support_check(st);
      const bool good = st.lambda < 0 && st.mu < 0 && st.hc < 0 && sup.ok && k.seconds < 60.0 &&
                        std::abs(st.m1 - 1.0) < 1e-6 && std::abs(st.mj - 1.0) < 1e-6;
      ok = ok && good;
      out += fmt(" [%s lambda=%.4g mu=%.4g hc=%.4g r_s=%.4g %.1fs%s]", label(p, c).c_str(), st.lambda, st.mu, st.hc,
                 st.r_support, k.seconds, good ? "" : " BAD");
      g_cases.push_back(std::move(k));
    }
  return ok && g_cases.size() == 6;
}

bool identity_suite(std::string& out) {
  using Getter = double (*)(const IdentityResiduals&);
  const std::vector<std::pair<const char*, Getter>> names{
      {"virial", [](const IdentityResiduals& r) { return r.virial; }},
      {"el1", [](const IdentityResiduals& r) { return r.el1; }},
      {"el2", [](const IdentityResiduals& r) { return r.el2; }},
      {"muj", [](const IdentityResiduals& r) { return r.muj; }},
      {"lambda", [](const IdentityResiduals& r) { return r.lambda; }},
      {"mf", [](const IdentityResiduals& r) { return r.mf; }},
      {"inegatif", [](const IdentityResiduals& r) { return r.inegatif; }}};
  const std::vector<double> ns{512, 1024, 2048, 4096};
  bool ok = !g_cases.empty();
  double worst = 0.0, worst_order = kInf;
  for (const Case& k : g_cases) {
    std::vector<IdentityResiduals> res;
    for (double n : ns) {
      const RadialGrid g = RadialGrid::make(k.state.phi.grid.max, static_cast<std::size_t>(n));
      res.push_back(multiplier_identities(integrate_state(k.state.spec, k.state.params, k.state.psi0, k.state.mu, g)));
    }
    for (const auto& [name, get] : names) {
      std::vector<double> y;
      for (const auto& r : res) y.push_back(std::abs(get(r)));
      worst = std::max(worst, y.back());
      if (y.back() >= 1e-4) {
        ok = false;
        out += fmt(" [%s %s=%.2e]", label(k.p, k.c).c_str(), name, y.back());
      }
      // exact up to rounding on every grid: nothing to refine
      if (*std::max_element(y.begin(), y.end()) < 1e-13) continue;
      const double order = -loglog_slope(ns, y);
      worst_order = std::min(worst_order, order);
      if (order < 1.8) {
        ok = false;
        out += fmt(" [%s %s order %.2f]", label(k.p, k.c).c_str(), name, order);
      }
    }
  }
  out += fmt(" max residual at n=4096 %.2e, min order %.2f", worst, worst_order);
  return ok;
}

bool cross_solver(std::string& out) {
  bool ok = !g_cases.empty();
  double worst = 0.0;
  for (const Case& k : g_cases) {
    const GroundState& st = k.state;
    const GroundState fp = fixed_point_solve(st.spec, st.params, st.lambda, st.mu, st.phi.grid);
    double d = 0.0;
    for (std::size_t i = 0; i < st.phi.values.size(); ++i)
      d = std::max(d, std::abs(fp.phi.values[i] - st.phi.values[i]));
    d /= std::abs(st.phi.values.front());
    worst = std::max(worst, d);
    ok = ok && d < 1e-4;
  }
  out += fmt(" max |dphi|/|phi(0)| = %.2e over %zu states", worst, g_cases.size());
  return ok;
}

bool scaling_laws(std::string& out) {
  const CasimirSpec spec = make_polytrope(2.0);
  const ModelParams par{1.0};
  const GroundState& st = g_cases.at(1).state;  // p = 2, c = 1
  double worst_gap = 0.0;
  std::vector<double> lams, res;
  for (double lam : {0.5, 2.0, 8.0, 16.0, 32.0, 64.0, 128.0}) {
    const ScalingReport d = dilate_transform(st.f, lam, spec, par);
    worst_gap = std::max(worst_gap, d.max_relative_gap);
    if (lam >= 8.0) {
      lams.push_back(lam);
      res.push_back(std::abs(lam * d.after.hc + d.before.epot));
    }
  }
  const double slope = loglog_slope(lams, res);
  out += fmt(" max relative gap %.2e, residual slope %.4f", worst_gap, slope);
  return worst_gap < 1e-5 && std::abs(slope + 1.0) <= 0.1;
}

bool monotonicity(std::string& out) {
  const double tol = 1e-8;
  const MonotonicityReport rep = monotonicity_check(g_cases.at(1).state, {0.25, 0.5, 0.75}, {}, tol);
  for (const auto& r : rep.rows) out += fmt(" [k=%g margins %.3e %.3e]", r.k, r.margin_mj, r.margin_m1);
  return rep.rows.size() == 3 && rep.min_margin() > 2.0 * tol;
}

bool f_function_checks(std::string& out) {
  const CasimirSpec spec = make_polytrope(2.0);
  bool convex = true;
  for (double a : {0.25, 1.0, 4.0})
    for (double c : {1.0, 10.0, 100.0}) {
      const ModelParams par{c};
      std::vector<double> s(64), f(64);
      for (int k = 0; k < 64; ++k) {
        s[k] = 1e-2 * std::pow(1e4, k / 63.0);
        f[k] = f_function(par, a, spec, s[k]);
      }
      for (int k = 1; k < 63; ++k) {
        const double left = (f[k] - f[k - 1]) / (s[k] - s[k - 1]);
        const double right = (f[k + 1] - f[k]) / (s[k + 1] - s[k]);
        if (!(right > left)) {
          convex = false;
          out += fmt(" [nonconvex a=%g c=%g s=%.3g]", a, c, s[k]);
          break;
        }
      }
    }

  std::size_t most = 0, scans = 0;
  for (int ia = 0; ia < 10; ++ia)
    for (int im = 0; im < 10; ++im)
      for (double c : {1.0, 10.0, 100.0}) {
        const double a = 0.1 * std::pow(100.0, ia / 9.0);
        const double mu0 = -0.1 * std::pow(100.0, im / 9.0);
        most = std::max(most, f_roots(ModelParams{c}, a, spec, mu0).roots.size());
        ++scans;
      }

  double lo = kInf, hi = 0.0;
  for (int k = 0; k < 16; ++k) {
    const double s = 1e-2 * std::pow(1e2, k / 15.0);
    const double v = f_function(ModelParams{1e4}, 1.0, spec, s) * std::sqrt(s);
    lo = std::min(lo, v), hi = std::max(hi, v);
  }
  const double spread = (hi - lo) / lo;
  out += fmt(" convex on 9 (a, c) grids: %s; max roots %zu over %zu scans; F sqrt(s) spread %.2e at c=1e4",
             convex ? "yes" : "no", most, scans, spread);
  return convex && most <= 2 && spread < 0.01;
}

bool level_sets(std::string& out) {
  bool ok = !g_cases.empty();
  for (const Case& k : g_cases) {
    const LevelAsymptotic la = level_asymptotic(k.state);
    const double rel = la.coefficient / la.predicted - 1.0;
    const bool good = la.exponent >= 2.9 && la.exponent <= 3.1 && std::abs(rel) < 0.05;
    ok = ok && good;
    out += fmt(" [%s exp %.3f coef %+.2e%s]", label(k.p, k.c).c_str(), la.exponent, rel, good ? "" : " BAD");
  }
  return ok;
}

bool bootstrap(std::string& out) {
  bool ok = true;
  for (double p : {1.6, 2.0, 3.0, 5.0}) {
    const BootstrapResult b = bootstrap_exponents(p, 1.2, 50);
    const bool reached = b.first_above && *b.first_above <= 50;
    ok = ok && reached;
    out += fmt(" [p=%g k=%s boundary=%s]", p, reached ? std::to_string(*b.first_above).c_str() : "none",
               b.boundary_hit ? "yes" : "no");
    if (p == 2.0) ok = ok && b.boundary_hit;
  }
  return ok;
}

bool conservation(std::string& out) {
  const GroundState& st = g_cases.at(1).state;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ConservationReport> reps;
  for (double frac : {0.01, 0.005}) {
    DynamicsOptions o;
    o.n = 100000;
    o.t_end_dyn = 10.0;
    o.dt_fraction = frac;
    o.seed = 1;
    reps.push_back(conservation_run(st, o));
  }
  const double elapsed = seconds_since(t0);
  const double order = std::log2(reps[0].hc_drift / reps[1].hc_drift);
  bool ok = elapsed < 600.0 && order >= 1.8;
  for (const auto& r : reps) {
    ok = ok && r.hc_drift < 1e-3 && r.m1_drift == 0.0 && r.f_identical;
    out += fmt(" [dt=%.3g hc drift %.2e m1 drift %g f %s]", r.dt, r.hc_drift, r.m1_drift,
               r.f_identical ? "identical" : "changed");
  }
  out += fmt(" order %.2f", order);
  return ok;
}

bool stability(std::string& out) {
  DynamicsOptions o;
  o.seed = 1;
  const StabilityReport rep =
      stability_experiment(g_cases.at(1).state, {0.01, 0.02, 0.04}, PerturbationKind::amplitude, o);
  out += fmt(" noise floor %.4f baseline %.4f", rep.noise_floor, rep.baseline.max_dist_rho);
  for (const auto& r : rep.runs) out += fmt(" [delta=%g max %.4f]", r.delta, r.max_dist_rho);
  out += fmt(" floor %d monotone %d no_growth %d verdict %s", rep.at_noise_floor, rep.monotone, rep.no_growth,
             rep.verdict.c_str());
  return rep.verdict == "stable";
}

bool concentration(std::string& out) {
  const CasimirSpec spec = make_polytrope(2.0);
  const ModelParams rel{1.0};
  const GroundState& classical = g_cases.at(4).state;  // p = 2, c = inf
  const PhaseDensity datum = blowup_datum(classical, 2.5);
  const FunctionalReport fr = functionals(datum, spec, rel);
  KjOptions ko;
  const KjEstimate kj = estimate_kj(spec, rel, ko);
  const ThresholdVerdict th = threshold_check(fr.m1, fr.mj, spec, rel, kj);
  BlowupOptions bo;
  bo.n = 20000;
  bo.seed = 1;
  const BlowupReport run = blowup_experiment(spec, rel, datum, bo);
  const BlowupReport control = blowup_experiment(spec, ModelParams::classical(), datum, bo);
  out += fmt(" hc=%.4g s=%.4g bound=%.4g; c=1: %s (rho x%.1f); c=inf: %s (rho x%.2f)", fr.hc, th.s, th.bound,
             run.verdict.c_str(), run.max_rho_ratio, control.verdict.c_str(), control.max_rho_ratio);
  return fr.hc < 0 && th.s > th.bound && run.verdict == "concentrating" && control.verdict == "not concentrating";
}

bool equimeasurability(std::string& out) {
  const GroundState& st = g_cases.at(1).state;
  const ScalingReport dil = dilate_transform(st.f, 2.0, st.spec, st.params);
  PhaseDensity doubled = st.f;
  for (double& x : doubled.values()) x *= 2.0;
  std::vector<double> levels(32);
  for (std::size_t k = 0; k < levels.size(); ++k) levels[k] = st.f.sup() * (k + 1.0) / (levels.size() + 1.0);
  const EquimeasureReport same = equimeasure_compare(st.f, dil.transformed, levels);
  const EquimeasureReport scaled = equimeasure_compare(st.f, doubled, levels);
  // intermediate levels: the middle half
  double mid = 0.0;
  for (std::size_t k = 8; k < 24; ++k)
    mid = std::max(mid, std::abs(scaled.dist_g[k] - scaled.dist_f[k]) / scaled.dist_f[k]);
  out += fmt(" dilate discrepancy %.2e, doubled discrepancy at mid levels %.3f", same.max_discrepancy, mid);
  return same.max_discrepancy < 1e-6 && mid > 0.1;
}

}  // namespace

int main() {
  criterion(1, "ground states", ground_states);
  criterion(2, "identities", identity_suite);
  criterion(3, "shooting vs fixed point", cross_solver);
  criterion(4, "scaling laws", scaling_laws);
  criterion(5, "monotonicity", monotonicity);
  criterion(6, "F function", f_function_checks);
  criterion(7, "level sets", level_sets);
  criterion(8, "bootstrap", bootstrap);
  criterion(9, "conservation", conservation);
  criterion(10, "stability", stability);
  criterion(11, "concentration", concentration);
  criterion(12, "equimeasurability", equimeasurability);
  std::printf("%d of 12 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
