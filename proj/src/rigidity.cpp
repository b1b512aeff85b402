#include "vg/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steady_detail.hpp"
#include "vg/parallel.hpp"
#include "vg/quadrature.hpp"

namespace vg {

namespace {

struct PhaseSums {
  double m1 = 0.0, mj = 0.0, speed = 0.0, speed2 = 0.0;
};

PhaseSums phase_sums(const PhaseDensity& f, const CasimirSpec& spec) {
  const auto w = phase_weights(f.grid_r(), f.grid_u());
  const auto& gu = f.grid_u();
  PhaseSums s;
  for (std::size_t i = 0; i < f.grid_r().n; ++i) {
    for (std::size_t j = 0; j < gu.n; ++j) {
      const double v = f.at(i, j);
      if (v == 0.0) continue;
      const double wij = w[i * gu.n + j];
      const double u = gu.node(j);
      s.m1 += wij * v;
      s.mj += wij * spec.eval_j(v);
      s.speed += wij * u * v;
      s.speed2 += wij * u * u * v;
    }
  }
  return s;
}

bool use_classical(QuotientKind kind, const ModelParams& params) {
  return kind == QuotientKind::classical || (kind == QuotientKind::automatic && params.is_classical());
}

double quotient_from(double p, bool classical, double m1, double mj, double speed, double speed2, double grad2) {
  if (!(m1 > 0.0)) throw DomainError("interpolation_quotient: undefined for f = 0");
  if (!(grad2 > 0.0)) throw NumericalError("interpolation_quotient: vanishing potential energy");
  const double mj_part = std::pow(mj, 1.0 / (3.0 * (p - 1.0)));
  if (classical) return std::sqrt(speed2) * std::pow(m1, (7.0 * p - 9.0) / (6.0 * (p - 1.0))) * mj_part / grad2;
  return speed * std::pow(m1, (2.0 * p - 3.0) / (3.0 * (p - 1.0))) * mj_part / grad2;
}

double rel_gap(double measured, double predicted) {
  const double scale = std::max(std::abs(predicted), std::abs(measured));
  return scale == 0.0 ? 0.0 : std::abs(measured - predicted) / scale;
}

double report_gap(const FunctionalReport& a, const FunctionalReport& b) {
  return std::max({rel_gap(a.m1, b.m1), rel_gap(a.mj, b.mj), rel_gap(a.ekin, b.ekin), rel_gap(a.epot, b.epot)});
}

// Golden-section search of a unimodal-looking function; every evaluation is
// forwarded to g, which records the global best.
template <class G>
double golden(G&& g, double lo, double hi, std::size_t evals) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  if (evals == 0) return lo;
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = g(x1);
  if (evals == 1) return x1;
  double f2 = g(x2);
  for (std::size_t k = 2; k < evals; ++k) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = g(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = g(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

double j_integral(const PhaseDensity& f, const CasimirSpec& spec, const std::vector<double>& w, double alpha) {
  double s = 0.0;
  const auto vals = f.values();
  for (std::size_t k = 0; k < vals.size(); ++k)
    if (vals[k] > 0.0) s += w[k] * spec.eval_j(alpha * vals[k]);
  return s;
}

}  // namespace

double interpolation_quotient(const PhaseDensity& f, const CasimirSpec& spec, const ModelParams& params,
                              QuotientKind kind) {
  const PhaseSums s = phase_sums(f, spec);
  if (!(s.m1 > 0.0)) throw DomainError("interpolation_quotient: undefined for f = 0");
  const double grad2 = 2.0 * gradient_energy(poisson_solve(density_moment(f)));
  return quotient_from(spec.p, use_classical(kind, params), s.m1, s.mj, s.speed, s.speed2, grad2);
}

double interpolation_quotient(const GroundState& st, QuotientKind kind) {
  if (st.trivial) throw DomainError("interpolation_quotient: undefined for f = 0");
  const bool classical = use_classical(kind, st.params);
  if (classical && !st.params.is_classical()) return interpolation_quotient(st.f, st.spec, st.params, kind);
  const StateIntegrals& in = st.integrals;
  return quotient_from(st.spec.p, classical, in.m1, in.mj, in.speed, 2.0 * in.ekin, 2.0 * in.grad_energy);
}

KjEstimate estimate_kj(const CasimirSpec& spec, const ModelParams& params, const KjOptions& opt) {
  if (opt.budget < 1) throw DomainError("estimate_kj: budget must be at least 1");
  if (opt.families.empty()) throw DomainError("estimate_kj: no trial family");
  KjEstimate best;
  best.p = spec.p;
  best.best_quotient = std::numeric_limits<double>::infinity();
  auto consider = [&](const PhaseDensity& f, const std::string& desc) {
    const double q = interpolation_quotient(f, spec, params, opt.kind);
    ++best.trial_count;
    if (q < best.best_quotient) best.best_quotient = q, best.witness = desc;
    return q;
  };
  const std::size_t per_family = std::max<std::size_t>(1, opt.budget / opt.families.size());
  for (const TrialFamily fam : opt.families) {
    const std::string name = to_string(fam);
    switch (fam) {
      case TrialFamily::ground_state:
        for (std::size_t k = 0; k < opt.ground_states.size() && k < per_family; ++k)
          consider(opt.ground_states[k], name + " #" + std::to_string(k));
        break;
      case TrialFamily::box:
        consider(make_trial(fam, {}, opt.box), name);
        break;
      case TrialFamily::ellipsoid:
        golden([&](double k) { return consider(make_trial(fam, {k}, opt.box), name + " k=" + std::to_string(k)); },
               0.0, 4.0, per_family);
        break;
      case TrialFamily::gaussian:
        golden([&](double s) { return consider(make_trial(fam, {s}, opt.box), name + " s=" + std::to_string(s)); },
               0.1, 1.0, per_family);
        break;
      case TrialFamily::separable: {
        double k1 = 1.0, k2 = 1.0;
        const std::size_t per_line = std::max<std::size_t>(2, per_family / 4);
        auto desc = [&](double a, double b) { return name + " k1=" + std::to_string(a) + " k2=" + std::to_string(b); };
        for (int cycle = 0; cycle < 2; ++cycle) {
          k1 = golden([&](double x) { return consider(make_trial(fam, {x, k2}, opt.box), desc(x, k2)); }, 0.0, 4.0,
                      per_line);
          k2 = golden([&](double x) { return consider(make_trial(fam, {k1, x}, opt.box), desc(k1, x)); }, 0.0, 4.0,
                      per_line);
        }
        break;
      }
    }
  }
  if (best.trial_count == 0) throw DomainError("estimate_kj: the trial families produced no trial");
  return best;
}

ThresholdVerdict threshold_check(double m1, double mj, const CasimirSpec& spec, const ModelParams& params,
                                 const KjEstimate& kj) {
  if (!(m1 > 0.0 && mj > 0.0)) throw DomainError("threshold_check: masses must be positive");
  ThresholdVerdict v;
  const double p = spec.p;
  v.s = std::pow(m1, (2.0 * p - 3.0) / (3.0 * (p - 1.0))) * std::pow(mj, 1.0 / (3.0 * (p - 1.0)));
  if (params.is_classical()) {
    v.classical = true;
    v.bound = std::numeric_limits<double>::infinity();
    v.below_estimate = true;
    v.verdict = "classical: no threshold";
    return v;
  }
  v.bound = 2.0 * params.c * kj.best_quotient;
  v.below_estimate = v.s < v.bound;
  v.verdict = v.below_estimate ? "subcritical w.r.t. estimate" : "supercritical w.r.t. estimate";
  v.caveat =
      "estimate is an upper bound for K_j: S < 2c*K_hat does not certify subcriticality, "
      "S >= 2c*K_hat does not certify supercriticality relative to true K_j";
  return v;
}

ScalingReport dilate_transform(const PhaseDensity& f, double lam, const CasimirSpec& spec, const ModelParams& params,
                               std::optional<std::pair<RadialGrid, SpeedGrid>> target) {
  if (!(lam > 0.0)) throw DomainError("dilate_transform: lambda must be positive");
  ScalingReport rep;
  rep.parameter = lam;
  rep.before = functionals(f, spec, params);
  if (!target) {
    PhaseDensity g(RadialGrid::make(lam * f.grid_r().max, f.grid_r().n),
                   SpeedGrid::make(f.grid_u().max / lam, f.grid_u().n));
    std::copy(f.values().begin(), f.values().end(), g.values().begin());
    rep.transformed = std::move(g);
  } else {
    const auto& [gr, gu] = *target;
    const double hr = gr.h(), hu = gu.h();
    if (lam * f.support_radius() > gr.max - hr || f.support_speed() / lam > gu.max - hu)
      throw DomainError("dilate_transform: dilated support escapes the grid");
    rep.transformed = PhaseDensity::tabulate(gr, gu, [&](double r, double u) { return f.interpolate(r / lam, lam * u); });
  }
  rep.after = functionals(rep.transformed, spec, params);

  double ekin = 0.0;
  if (params.is_classical()) {
    ekin = rep.before.ekin / (lam * lam);
  } else {
    const auto w = phase_weights(f.grid_r(), f.grid_u());
    const auto& gu = f.grid_u();
    const double c2 = params.c * params.c;
    for (std::size_t i = 0; i < f.grid_r().n; ++i) {
      for (std::size_t j = 0; j < gu.n; ++j) {
        const double u = gu.node(j);
        // c^2 (sqrt(lam^2 + u^2/c^2) - lam), cancellation-free
        const double e = u * u / (std::sqrt(lam * lam + u * u / c2) + lam);
        ekin += w[i * gu.n + j] * e * f.at(i, j);
      }
    }
    ekin /= lam;
  }
  rep.predicted_after = FunctionalReport::from_parts(rep.before.m1, rep.before.mj, ekin, rep.before.epot / lam);
  rep.max_relative_gap = report_gap(rep.after, rep.predicted_after);
  return rep;
}

ScalingReport alpha_rescale(const PhaseDensity& f, double alpha, const CasimirSpec& spec, const ModelParams& params,
                            bool k_mode) {
  if (!(alpha > 0.0)) throw DomainError("alpha_rescale: parameter must be positive");
  const auto w = phase_weights(f.grid_r(), f.grid_u());
  const double jf = j_integral(f, spec, w, 1.0);
  if (!(jf > 0.0)) throw DomainError("alpha_rescale: undefined for f = 0");
  auto h = [&](double a) { return j_integral(f, spec, w, a) / (a * jf); };

  ScalingReport rep;
  double k = 1.0;
  if (k_mode) {
    if (alpha > 1.0) throw DomainError("alpha_rescale: k must lie in (0, 1]");
    k = alpha;
    double lo = 1.0, hi = 2.0;
    while (h(hi) < 1.0 / k) {
      lo = hi, hi *= 2.0;
      if (hi > 1e300) throw NumericalError("alpha_rescale: h(alpha) does not reach 1/k");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (h(mid) < 1.0 / k ? lo : hi) = mid;
    }
    alpha = 0.5 * (lo + hi);
  }
  rep.parameter = alpha;
  rep.h_alpha = h(alpha);
  rep.before = functionals(f, spec, params);

  PhaseDensity g(RadialGrid::make(f.grid_r().max * std::pow(alpha, -1.0 / 3.0), f.grid_r().n), f.grid_u());
  for (std::size_t idx = 0; idx < f.values().size(); ++idx) g.values()[idx] = alpha * f.values()[idx];
  rep.transformed = std::move(g);
  rep.after = functionals(rep.transformed, spec, params);
  rep.predicted_after = FunctionalReport::from_parts(rep.before.m1, rep.h_alpha * rep.before.mj, rep.before.ekin,
                                                     std::cbrt(alpha) * rep.before.epot);
  rep.max_relative_gap = report_gap(rep.after, rep.predicted_after);

  const double lo_b = std::pow(alpha, spec.p1 - 1.0), hi_b = std::pow(alpha, spec.p2 - 1.0);
  const double slack = 1e-12;
  if (alpha >= 1.0)
    rep.dichotomy_ok = rep.h_alpha >= lo_b * (1.0 - slack) && rep.h_alpha <= hi_b * (1.0 + slack);
  else
    rep.dichotomy_ok = rep.h_alpha <= lo_b * (1.0 + slack) && rep.h_alpha >= hi_b * (1.0 - slack);
  if (k_mode) rep.dichotomy_ok = rep.dichotomy_ok && 1.0 / k <= hi_b * (1.0 + slack);
  return rep;
}

double MonotonicityReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::min({m, r.margin_mj, r.margin_m1});
  return m;
}

MonotonicityReport monotonicity_check(const GroundState& st, const std::vector<double>& k_grid,
                                      const SolveOptions& options, double tol) {
  if (st.trivial) throw DomainError("monotonicity_check: needs a nontrivial state");
  for (double k : k_grid)
    if (!(k > 0.0 && k <= 1.0)) throw DomainError("monotonicity_check: k must lie in (0, 1]");
  MonotonicityReport rep;
  rep.hc = st.hc;
  const double p1 = st.spec.p1, p2 = st.spec.p2;
  SolveOptions opt = options;
  opt.start = std::make_pair(st.psi0, st.mu);
  rep.rows.resize(k_grid.size());
  parallel_for(k_grid.size(), [&](std::size_t i) {
    const double k = k_grid[i];
    MonotonicityRow& row = rep.rows[i];
    row.k = k;
    row.hc_mj = solve_targets(st.spec, st.params, {st.m1, k * st.mj, tol}, opt).hc;
    row.hc_m1 = solve_targets(st.spec, st.params, {k * st.m1, st.mj, tol}, opt).hc;
    row.bound_mj = std::pow(k, 1.0 / (3.0 * (p2 - 1.0))) * st.hc;
    row.bound_m1 = std::pow(k, (5.0 * p1 - 6.0) / (3.0 * (p1 - 1.0))) * st.hc;
    row.margin_mj = (row.hc_mj - row.bound_mj) / std::abs(st.hc);
    row.margin_m1 = (row.hc_m1 - row.bound_m1) / std::abs(st.hc);
  });
  return rep;
}

double nondichotomy_sum(double alpha, double beta, double p1, double p2) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0))
    throw DomainError("nondichotomy_sum: alpha and beta must lie in [0, 1]");
  const double e1 = (5.0 * p1 - 6.0) / (3.0 * (p1 - 1.0));
  const double e2 = 1.0 / (3.0 * (p2 - 1.0));
  return std::pow(alpha, e1) * std::pow(beta, e2) + std::pow(1.0 - alpha, e1) * std::pow(1.0 - beta, e2);
}

namespace {

void check_f_args(const ModelParams& params, double a, double s) {
  if (params.is_classical()) throw DomainError("f_function: requires finite c; check the large-c limit instead");
  if (!(a > 0.0)) throw DomainError("f_function: a must be positive");
  if (!(s > 0.0)) throw DomainError("f_function: s must be positive");
}

}  // namespace

double f_function(const ModelParams& params, double a, const CasimirSpec& spec, double s) {
  check_f_args(params, a, s);
  const double c = params.c, c2 = c * c;
  // q = a sin^2(theta) absorbs sqrt(q) at 0 and the edge of G at q = a.
  auto integrand = [&](double th) {
    const double sn = std::sin(th), cs = std::cos(th);
    const double q = a * sn * sn;
    const double x = s * q / c2;
    const double root = std::sqrt(s * a) / c * sn * std::sqrt(2.0 + x);  // [(1+x)^2 - 1]^{1/2}
    return (1.0 + x) * root * spec.eval_g_inv(a * cs * cs) * 2.0 * a * sn * cs;
  };
  return c / s * quad::adaptive(integrand, 0.0, 0.5 * kPi, 1e-13);
}

double f_function_second(const ModelParams& params, double a, const CasimirSpec& spec, double s) {
  check_f_args(params, a, s);
  const double c = params.c, c2 = c * c;
  // q^2/c^3 [(1+x)^2-1]^{-3/2} = sqrt(q) s^{-3/2} (2+x)^{-3/2}
  auto integrand = [&](double th) {
    const double sn = std::sin(th), cs = std::cos(th);
    const double q = a * sn * sn;
    const double x = s * q / c2;
    const double core = std::sqrt(a) * sn * std::pow(s, -1.5) * std::pow(2.0 + x, -1.5) * (q / c2 + 3.0 / s);
    return core * spec.eval_g_inv(a * cs * cs) * 2.0 * a * sn * cs;
  };
  return quad::adaptive(integrand, 0.0, 0.5 * kPi, 1e-13);
}

FRoots f_roots(const ModelParams& params, double a, const CasimirSpec& spec, double mu0) {
  if (!(mu0 < 0.0)) throw DomainError("f_roots: mu0 must be negative");
  const double s0 = -mu0;
  const double f0 = f_function(params, a, spec, s0);
  FRoots out;
  out.window_lo = s0 * 1e-4;
  out.window_hi = s0 * 1e4;
  std::vector<double> xs;
  for (int k = 0; k < 64; ++k) xs.push_back(std::log(out.window_lo) + k * std::log(1e8) / 63.0);
  xs.push_back(std::log(s0));
  std::sort(xs.begin(), xs.end());
  std::vector<double> d(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k)
    d[k] = xs[k] == std::log(s0) ? 0.0 : f_function(params, a, spec, std::exp(xs[k])) - f0;

  out.roots.push_back(s0);
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    if (d[k] == 0.0 || d[k + 1] == 0.0 || (d[k] < 0.0) == (d[k + 1] < 0.0)) continue;
    double lo = xs[k], hi = xs[k + 1];
    const bool lo_neg = d[k] < 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      const bool neg = f_function(params, a, spec, std::exp(mid)) - f0 < 0.0;
      (neg == lo_neg ? lo : hi) = mid;
    }
    out.roots.push_back(std::exp(0.5 * (lo + hi)));
  }
  std::sort(out.roots.begin(), out.roots.end());
  std::vector<double> unique;
  for (double r : out.roots)
    if (unique.empty() || std::abs(r - unique.back()) > 1e-9 * r) unique.push_back(r);
  out.roots = std::move(unique);
  return out;
}

EquimeasureReport equimeasure_compare(const PhaseDensity& f, const PhaseDensity& g, const std::vector<double>& levels) {
  EquimeasureReport rep;
  rep.dist_f = distribution_function(f, levels);
  rep.dist_g = distribution_function(g, levels);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double d = std::abs(rep.dist_f[k] - rep.dist_g[k]);
    if (d > rep.max_discrepancy) rep.max_discrepancy = d, rep.worst_level = k;
  }
  rep.sup_f = f.sup();
  rep.sup_g = g.sup();
  return rep;
}

namespace {

// phi''(0) from an even polynomial phi0 + c2 r^2 + c4 r^4 + c6 r^6 through
// the first four nodes.
double central_curvature(const RadialField& phi) {
  if (phi.grid.n < 4) throw NumericalError("level_asymptotic: grid too coarse");
  double m[3][4];
  for (int i = 0; i < 3; ++i) {
    const double r2 = std::pow(phi.grid.node(i + 1), 2);
    m[i][0] = r2, m[i][1] = r2 * r2, m[i][2] = r2 * r2 * r2;
    m[i][3] = phi.values[i + 1] - phi.values[0];
  }
  for (int col = 0; col < 3; ++col) {
    for (int row = col + 1; row < 3; ++row) {
      const double fct = m[row][col] / m[col][col];
      for (int k = col; k < 4; ++k) m[row][k] -= fct * m[col][k];
    }
  }
  double x[3];
  for (int row = 2; row >= 0; --row) {
    double s = m[row][3];
    for (int k = row + 1; k < 3; ++k) s -= m[row][k] * x[k];
    x[row] = s / m[row][row];
  }
  return 2.0 * x[0];
}

}  // namespace

double level_measure(const GroundState& st, double gap) {
  if (st.trivial) return 0.0;
  if (!(gap > 0.0 && gap <= st.a)) throw DomainError("level_measure: gap must lie in (0, a]");
  const double e = std::abs(st.mu) * gap;
  const double phi0 = st.phi.values.front();
  auto rise = [&](double r) { return st.phi.interpolate(r) - phi0; };
  double lo = 0.0, hi = std::min(st.r_support, st.phi.grid.max);
  if (rise(hi) < e) throw NumericalError("level_measure: level set reaches the support edge");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rise(mid) < e ? lo : hi) = mid;
  }
  const double r_edge = 0.5 * (lo + hi);
  if (r_edge < 2.0 * st.phi.grid.h())
    throw NumericalError("level_measure: insufficient resolution near the peak");
  auto integrand = [&](double r) {
    const double room = e - rise(r);
    if (!(room > 0.0)) return 0.0;
    const double u = kinetic_weight_inverse(st.params, room);
    return 4.0 * kPi * r * r * (4.0 * kPi / 3.0) * u * u * u;
  };
  return quad::adaptive(integrand, 0.0, r_edge, 1e-11);
}

LevelAsymptotic level_asymptotic(const GroundState& st, std::vector<double> gaps) {
  if (st.trivial) throw DomainError("level_asymptotic: needs a nontrivial state");
  LevelAsymptotic out;
  if (gaps.empty())
    for (int k = 0; k < 9; ++k) gaps.push_back(st.a * std::pow(10.0, -3.0 + 2.0 * k / 8.0));
  std::sort(gaps.begin(), gaps.end());
  out.gaps = gaps;
  out.measures.resize(gaps.size());
  for (std::size_t k = 0; k < gaps.size(); ++k) out.measures[k] = level_measure(st, gaps[k]);

  // Free slope in log-log, and the cubic coefficient as the intercept of a
  // linear fit of meas/(a-tau)^3 against (a-tau).
  const std::size_t n = gaps.size();
  auto linfit = [n](const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) sx += x[k], sy += y[k], sxx += x[k] * x[k], sxy += x[k] * y[k];
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::make_pair(slope, (sy - slope * sx) / n);
  };
  std::vector<double> lx(n), ly(n), ratio(n);
  for (std::size_t k = 0; k < n; ++k) {
    lx[k] = std::log(gaps[k]);
    ly[k] = std::log(out.measures[k]);
    ratio[k] = out.measures[k] / std::pow(gaps[k], 3);
  }
  out.exponent = linfit(lx, ly).first;
  out.coefficient = linfit(gaps, ratio).second;
  out.curvature = central_curvature(st.phi);
  out.curvature_from_rho = st.rho_center() / 3.0;
  out.predicted = kLevelConstant * std::pow(std::abs(st.mu) / std::sqrt(out.curvature), 3);
  return out;
}

BootstrapResult bootstrap_exponents(double p, double q0, std::size_t max_iter) {
  if (!(p > 1.5)) throw DomainError("bootstrap_exponents: p > 3/2 required");
  if (!(q0 > 1.0 && q0 < 1.5)) throw DomainError("bootstrap_exponents: q0 must lie in (1, 3/2)");
  BootstrapResult res;
  res.fixed_point = 3.0 * (2.0 * p - 1.0) / (2.0 * (3.0 * p - 2.0));
  res.q.push_back(q0);
  const double boundary_tol = 1e-12;
  for (std::size_t k = 0; k < max_iter; ++k) {
    const double q = res.q.back();
    const double next = 3.0 * (p - 1.0) * q / ((3.0 * p - 2.0) * (3.0 - 2.0 * q));
    res.q.push_back(next);
    if (std::abs(next - 1.5) <= boundary_tol) {
      res.boundary_hit = true;
      res.first_above = res.q.size() - 1;
      break;
    }
    if (next > 1.5) {
      res.first_above = res.q.size() - 1;
      break;
    }
    if (!(next > 1.0)) break;
  }
  return res;
}

}  // namespace vg
