#include "vg/steady.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "steady_detail.hpp"
#include "vg/parallel.hpp"
#include "vg/quadrature.hpp"

namespace vg {

namespace {

// Shooting state: psi, w = r^2 psi', then running integrals from 0 to r.
enum Slot { kPsi, kW, kRho, kCas, kJp, kKin, kVir, kNeg, kSpeed, kPsiRho, kGrad, kSlots };
using State = std::array<double, kSlots>;

template <bool Full>
State derivative(const MomentEvaluator& ev, double r, const State& y) {
  State d{};
  const double psi = y[kPsi];
  const double r2 = r * r;
  const double shell = 4.0 * kPi * r2;
  d[kPsi] = y[kW] / r2;
  if constexpr (Full) {
    const VelocityMoments m = ev.all(psi);
    d[kW] = r2 * m.rho;
    d[kRho] = shell * m.rho;
    d[kCas] = shell * m.casimir;
    d[kJp] = shell * m.jprime_q;
    d[kKin] = shell * m.kinetic;
    d[kVir] = shell * m.virial;
    d[kNeg] = shell * m.negative;
    d[kSpeed] = shell * m.speed;
    d[kPsiRho] = shell * psi * m.rho;
    d[kGrad] = 2.0 * kPi * y[kW] * y[kW] / r2;
  } else {
    const auto [rho, cas] = ev.density_and_casimir(psi);
    d[kW] = r2 * rho;
    d[kRho] = shell * rho;
    d[kCas] = shell * cas;
  }
  return d;
}

State axpy(const State& y, const State& d, double s) {
  State o;
  for (std::size_t k = 0; k < kSlots; ++k) o[k] = y[k] + s * d[k];
  return o;
}

template <bool Full>
State rk4(const MomentEvaluator& ev, double r, const State& y, double h) {
  const State k1 = derivative<Full>(ev, r, y);
  const State k2 = derivative<Full>(ev, r + 0.5 * h, axpy(y, k1, 0.5 * h));
  const State k3 = derivative<Full>(ev, r + 0.5 * h, axpy(y, k2, 0.5 * h));
  const State k4 = derivative<Full>(ev, r + h, axpy(y, k3, h));
  State o;
  for (std::size_t k = 0; k < kSlots; ++k) o[k] = y[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
  return o;
}

// Taylor start psi = psi0 + c2 r^2 + c4 r^4 on [0, h]; the running integrals
// over the first cell use three-point Gauss-Legendre along the series.
template <bool Full>
State series_start(const MomentEvaluator& ev, double psi0, double h) {
  const double rho0 = ev.density(psi0);
  const double dpsi = 1e-4 * std::abs(psi0);
  const double drho = (ev.density(psi0 + dpsi) - ev.density(psi0 - dpsi)) / (2.0 * dpsi);
  const double c2 = rho0 / 6.0;
  const double c4 = drho * rho0 / 120.0;
  auto at = [&](double r) {
    State y{};
    y[kPsi] = psi0 + c2 * r * r + c4 * r * r * r * r;
    y[kW] = 2.0 * c2 * r * r * r + 4.0 * c4 * r * r * r * r * r;
    return y;
  };
  State y = at(h);
  const double xg[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double wg[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  for (int g = 0; g < 3; ++g) {
    const double r = 0.5 * h * (1.0 + xg[g]);
    const State d = derivative<Full>(ev, r, at(r));
    for (std::size_t k = kRho; k < kSlots; ++k) y[k] += 0.5 * h * wg[g] * d[k];
  }
  return y;
}

struct Shot {
  std::vector<double> psi;  // node values while psi < 0
  State at_support{};
  double r_support = 0.0;
};

template <bool Full>
Shot shoot(const MomentEvaluator& ev, double psi0, const RadialGrid& grid) {
  if (grid.n < 3) throw DomainError("integrate_state: grid needs at least 3 nodes");
  const double h = grid.h();
  Shot s;
  s.psi.push_back(psi0);
  State y = series_start<Full>(ev, psi0, h);
  if (!(y[kPsi] < 0.0)) throw NumericalError("integrate_state: support radius below the first grid spacing");
  s.psi.push_back(y[kPsi]);
  const double tol = 1e-12 * grid.max;
  for (std::size_t i = 1; i + 1 < grid.n; ++i) {
    const double r = grid.node(i);
    // RK4 error scales with (step/r); cells near the center are subdivided.
    const std::size_t sub = std::max<std::size_t>(1, 32 / i);
    State next = y;
    for (std::size_t k = 0; k < sub; ++k) next = rk4<Full>(ev, r + k * h / sub, next, h / sub);
    if (!std::isfinite(next[kPsi])) throw NumericalError("integrate_state: non-finite value during shooting");
    if (next[kPsi] < 0.0) {
      y = next;
      s.psi.push_back(y[kPsi]);
      continue;
    }
    auto partial = [&](double d) {
      State z = y;
      for (std::size_t k = 0; k < sub; ++k) z = rk4<Full>(ev, r + k * d / sub, z, d / sub);
      return z;
    };
    double lo = 0.0, hi = h;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (partial(mid)[kPsi] < 0.0 ? lo : hi) = mid;
    }
    const double d = 0.5 * (lo + hi);
    s.at_support = partial(d);
    s.r_support = r + d;
    return s;
  }
  throw NumericalError("integrate_state: support exceeds grid, psi never reaches zero before r_max");
}

std::array<double, 2> light_masses(const CasimirSpec& spec, const ModelParams& params, double psi0, double mu,
                                   const RadialGrid& grid, double tol) {
  const MomentEvaluator ev(spec, params, mu, tol);
  const Shot s = shoot<false>(ev, psi0, grid);
  return {4.0 * kPi * s.at_support[kW], s.at_support[kCas]};
}

}  // namespace

namespace detail {

double relative_gap(double lhs, double rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
}

PhaseDensity tabulate_q(const GroundState& st, const TabulationOptions& tab) {
  const RadialGrid& gr = st.phi.grid;
  if (st.trivial) return PhaseDensity(gr, SpeedGrid::make(1.0, tab.speed_nodes));
  const SpeedGrid gu = SpeedGrid::make(tab.speed_margin * st.u_bound(), tab.speed_nodes);
  std::vector<double> gamma(gu.n);
  for (std::size_t j = 0; j < gu.n; ++j) gamma[j] = kinetic_weight(st.params, gu.node(j));
  PhaseDensity f(gr, gu);
  for (std::size_t i = 0; i < gr.n; ++i) {
    const double psi = st.phi.values[i] - st.lambda;
    if (!(psi < 0.0)) continue;
    for (std::size_t j = 0; j < gu.n; ++j) {
      const double arg = (gamma[j] + psi) / st.mu;
      if (arg > 0.0) f.at(i, j) = st.spec.eval_g_inv(arg);
    }
  }
  return f;
}

GroundState trivial_state(const CasimirSpec& spec, const ModelParams& params, double mu, const RadialGrid& grid,
                          const TabulationOptions& tab, const char* route) {
  GroundState st;
  st.params = params;
  st.spec = spec;
  st.mu = mu;
  st.phi = RadialField::zeros(grid);
  st.rho = RadialField::zeros(grid);
  st.trivial = true;
  st.route = route;
  st.f = tabulate_q(st, tab);
  return st;
}

}  // namespace detail

double GroundState::u_bound() const {
  if (trivial) return 0.0;
  return kinetic_weight_inverse(params, -psi0);
}

double GroundState::q_value(double r, double u) const {
  if (trivial || r >= r_support || r > phi.grid.max) return 0.0;
  const double psi = std::min(phi.interpolate(r) - lambda, 0.0);
  const double arg = (kinetic_weight(params, u) + psi) / mu;
  return arg > 0.0 ? spec.eval_g_inv(arg) : 0.0;
}

FunctionalReport GroundState::report() const { return FunctionalReport::from_parts(m1, mj, ekin, epot); }

GroundState integrate_state(const CasimirSpec& spec, const ModelParams& params, double psi0, double mu,
                            const RadialGrid& grid, const TabulationOptions& tab) {
  if (!(mu < 0.0)) throw DomainError("integrate_state: mu must be negative");
  if (psi0 > 0.0 || std::isnan(psi0)) throw DomainError("integrate_state: psi0 must be negative");
  if (psi0 == 0.0) return detail::trivial_state(spec, params, mu, grid, tab, "shooting");

  const MomentEvaluator ev(spec, params, mu, tab.moment_tol);
  const Shot s = shoot<true>(ev, psi0, grid);
  const State& y = s.at_support;
  const double b = y[kW];
  const double amp = b / s.r_support;
  if (!(amp > 0.0)) throw NumericalError("integrate_state: nonnegative lambda from the exterior match");

  GroundState st;
  st.params = params;
  st.spec = spec;
  st.lambda = -amp;
  st.mu = mu;
  st.psi0 = psi0;
  st.a = psi0 / mu;
  st.r_support = s.r_support;
  st.route = "shooting";

  st.phi = RadialField::zeros(grid);
  st.rho = RadialField::zeros(grid);
  for (std::size_t i = 0; i < grid.n; ++i) {
    if (i < s.psi.size())
      st.phi.values[i] = s.psi[i] + st.lambda;
    else
      st.phi.values[i] = -b / grid.node(i);
  }
  parallel_for(s.psi.size(), [&](std::size_t i) { st.rho.values[i] = ev.density(s.psi[i]); });

  StateIntegrals& in = st.integrals;
  in.m1 = 4.0 * kPi * b;
  in.mj = y[kCas];
  in.jprime_q = y[kJp];
  in.ekin = y[kKin];
  in.virial = y[kVir];
  in.negative = y[kNeg];
  in.speed = y[kSpeed];
  in.phi_rho = y[kPsiRho] + st.lambda * in.m1;
  in.grad_energy = y[kGrad] + 2.0 * kPi * b * b / s.r_support;

  st.m1 = in.m1;
  st.mj = in.mj;
  st.ekin = in.ekin;
  st.epot = in.grad_energy;
  st.hc = st.ekin - st.epot;
  st.f = detail::tabulate_q(st, tab);
  return st;
}

RadialGrid fitted_grid(const CasimirSpec& spec, const ModelParams& params, double psi0, double mu, std::size_t n,
                       double support_fraction) {
  if (!(psi0 < 0.0)) throw DomainError("fitted_grid: psi0 must be negative");
  if (!(support_fraction > 0.0 && support_fraction <= 1.0))
    throw DomainError("fitted_grid: support fraction must lie in (0, 1]");
  const MomentEvaluator ev(spec, params, mu, 1e-10);
  const double rho0 = ev.density(psi0);
  if (!(rho0 > 0.0)) throw NumericalError("fitted_grid: central density vanishes");
  const double r0 = std::sqrt(6.0 * std::abs(psi0) / rho0);
  const double h0 = r0 / 200.0;
  State y = series_start<false>(ev, psi0, h0);
  double r = h0;
  while (r < 1e8 * r0) {
    const double step = std::max(h0, 0.01 * r);
    const State next = rk4<false>(ev, r, y, step);
    if (next[kPsi] >= 0.0) {
      const double t = -y[kPsi] / (next[kPsi] - y[kPsi]);
      return RadialGrid::make((r + t * step) / support_fraction, n);
    }
    y = next;
    r += step;
  }
  throw NumericalError("fitted_grid: no finite support radius found");
}

StateIntegrals grid_integrals(const GroundState& st, double moment_tol) {
  StateIntegrals in;
  if (st.trivial) return in;
  const RadialGrid& g = st.phi.grid;
  const auto w = quad::simpson_weights(g.n, g.h());
  const MomentEvaluator ev(st.spec, st.params, st.mu, moment_tol);
  std::vector<VelocityMoments> m(g.n);
  parallel_for(g.n, [&](std::size_t i) { m[i] = ev.all(st.phi.values[i] - st.lambda); });
  for (std::size_t i = 0; i < g.n; ++i) {
    const double r = g.node(i);
    const double wi = 4.0 * kPi * r * r * w[i];
    in.m1 += wi * m[i].rho;
    in.mj += wi * m[i].casimir;
    in.jprime_q += wi * m[i].jprime_q;
    in.ekin += wi * m[i].kinetic;
    in.virial += wi * m[i].virial;
    in.negative += wi * m[i].negative;
    in.speed += wi * m[i].speed;
    in.phi_rho += wi * st.phi.values[i] * m[i].rho;
  }
  in.grad_energy = gradient_energy(st.phi);
  return in;
}

double self_consistency_residual(const GroundState& st) {
  if (st.trivial) return 0.0;
  const RadialField p = poisson_solve(st.rho);
  double d = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) d = std::max(d, std::abs(p.values[i] - st.phi.values[i]));
  return d / std::abs(st.phi.values.front());
}

GroundState solve_targets(const CasimirSpec& spec, const ModelParams& params, const SolveTargets& targets,
                          const SolveOptions& opt) {
  if (!(targets.m1_target > 0.0 && targets.mj_target > 0.0))
    throw DomainError("solve_targets: targets must be positive");
  if (!(targets.tol > 0.0)) throw DomainError("solve_targets: tolerance must be positive");

  using Vec2 = std::array<double, 2>;
  const double tm1 = std::log(targets.m1_target), tmj = std::log(targets.mj_target);
  std::size_t n_eval = opt.search_n;
  auto residual = [&](const Vec2& x) -> Vec2 {
    const double psi0 = -std::exp(x[0]), mu = -std::exp(x[1]);
    const RadialGrid g = fitted_grid(spec, params, psi0, mu, n_eval, opt.support_fraction);
    const Vec2 m = light_masses(spec, params, psi0, mu, g, opt.tab.moment_tol);
    return {std::log(m[0]) - tm1, std::log(m[1]) - tmj};
  };
  auto norm = [](const Vec2& f) { return std::hypot(f[0], f[1]); };

  Vec2 x{};
  if (opt.start) {
    x = {std::log(std::abs(opt.start->first)), std::log(std::abs(opt.start->second))};
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 9; ++i) {
      for (int k = 0; k < 9; ++k) {
        const Vec2 trial{std::log(1e-4) + i * std::log(1e6) / 8.0, std::log(1e-4) + k * std::log(1e8) / 8.0};
        try {
          const double v = norm(residual(trial));
          if (v < best) best = v, x = trial;
        } catch (const NumericalError&) {
        }
      }
    }
    if (!std::isfinite(best)) throw NumericalError("solve_targets: targets unreachable on grid (scan found no state)");
  }

  // Two passes: converge on the search grid, then polish on the final grid.
  for (const std::size_t n_pass : {opt.search_n, opt.n}) {
    n_eval = n_pass;
    const double ftol = n_pass == opt.n ? 0.25 * targets.tol : std::max(0.25 * targets.tol, 1e-7);
    Vec2 f = residual(x);
    std::size_t it = 0;
    while (std::max(std::abs(f[0]), std::abs(f[1])) > ftol) {
      if (++it > opt.max_iter) throw NumericalError("solve_targets: targets unreachable on grid (no convergence)");
      const double fd = 1e-6;
      double jac[2][2];
      for (int k = 0; k < 2; ++k) {
        Vec2 xs = x;
        xs[k] += fd;
        const Vec2 fs = residual(xs);
        jac[0][k] = (fs[0] - f[0]) / fd;
        jac[1][k] = (fs[1] - f[1]) / fd;
      }
      const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
      if (!(std::abs(det) > 1e-14)) throw NumericalError("solve_targets: singular Jacobian");
      Vec2 step{-(jac[1][1] * f[0] - jac[0][1] * f[1]) / det, -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det};
      const double len = std::hypot(step[0], step[1]);
      if (len > 2.0) step = {step[0] * 2.0 / len, step[1] * 2.0 / len};
      double t = 1.0;
      bool accepted = false;
      for (int halving = 0; halving < 30 && !accepted; ++halving, t *= 0.5) {
        const Vec2 xn{x[0] + t * step[0], x[1] + t * step[1]};
        try {
          const Vec2 fn = residual(xn);
          if (norm(fn) < norm(f)) x = xn, f = fn, accepted = true;
        } catch (const NumericalError&) {
        }
      }
      if (!accepted) throw NumericalError("solve_targets: targets unreachable on grid (line search failed)");
    }
  }

  const double psi0 = -std::exp(x[0]), mu = -std::exp(x[1]);
  const RadialGrid g = fitted_grid(spec, params, psi0, mu, opt.n, opt.support_fraction);
  GroundState st = integrate_state(spec, params, psi0, mu, g, opt.tab);
  if (detail::relative_gap(st.m1, targets.m1_target) > targets.tol ||
      detail::relative_gap(st.mj, targets.mj_target) > targets.tol)
    throw NumericalError("solve_targets: final state misses the targets");
  return st;
}

double virial_residual(const GroundState& st) {
  if (st.trivial) return 0.0;
  const StateIntegrals in = grid_integrals(st);
  const double lhs = in.virial, rhs = -0.5 * in.phi_rho;
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale == 0.0 ? 0.0 : (lhs - rhs) / scale;
}

double IdentityResiduals::max_abs() const {
  return std::max({virial, mf, mnablav, mnablax, el1, el2, muj, lambda, virial2, inegatif, potential_routes});
}

IdentityResiduals multiplier_identities(const GroundState& st) {
  IdentityResiduals r;
  r.mu_negative = st.mu < 0.0;
  r.lambda_negative = st.lambda < 0.0;
  if (st.trivial) return r;
  using detail::relative_gap;
  const StateIntegrals in = grid_integrals(st);
  const double lam = st.lambda, mu = st.mu;
  const double ekin = in.ekin, ic = in.ekin - in.grad_energy;
  const double jp = in.jprime_q, mj = in.mj, m1 = in.m1;
  r.virial = relative_gap(in.virial, -0.5 * in.phi_rho);
  r.mf = relative_gap(ekin + in.phi_rho, lam * m1 + mu * jp);
  r.mnablav = relative_gap(ekin + in.phi_rho + in.virial / 3.0, lam * m1 + mu * mj);
  r.mnablax = relative_gap(ekin + 5.0 / 6.0 * in.phi_rho, lam * m1 + mu * mj);
  r.el1 = relative_gap(-ekin + 2.0 * ic, lam * m1 + mu * jp);
  r.el2 = relative_gap(-2.0 / 3.0 * ekin + 5.0 / 3.0 * ic, lam * m1 + mu * mj);
  r.muj = relative_gap(3.0 * mu * (jp - mj), ic - ekin);
  r.lambda = relative_gap(3.0 * lam * m1 * (jp - mj), -ekin * (2.0 * jp - 3.0 * mj) + ic * (5.0 * jp - 6.0 * mj));
  r.virial2 = relative_gap(in.virial, ekin - ic);
  r.inegatif = relative_gap(ic, -in.negative);
  r.potential_routes = relative_gap(in.grad_energy, -0.5 * in.phi_rho);
  r.convexity_positive = jp - mj > 0.0;
  r.muj_sign = ic - ekin < 0.0;
  return r;
}

SupportReport support_check(const GroundState& st) {
  SupportReport rep;
  rep.r_support = st.r_support;
  rep.u_bound = st.u_bound();
  if (st.trivial) {
    rep.potential_below_lambda = rep.potential_increasing = true;
    rep.ok = st.f.sup() == 0.0;
    return rep;
  }
  const double e_bound = -st.psi0;
  const auto& gr = st.f.grid_r();
  const auto& gu = st.f.grid_u();
  for (std::size_t i = 0; i < gr.n; ++i) {
    for (std::size_t j = 0; j < gu.n; ++j) {
      const bool outside = gr.node(i) > st.r_support || kinetic_weight(st.params, gu.node(j)) > e_bound;
      if (outside) rep.max_outside = std::max(rep.max_outside, st.f.at(i, j));
    }
  }
  if (st.r_support * 1.01 <= st.phi.grid.max)
    rep.max_outside = std::max(rep.max_outside, st.q_value(st.r_support * 1.01, 0.0));

  rep.potential_below_lambda = true;
  rep.potential_increasing = true;
  const auto& g = st.phi.grid;
  for (std::size_t i = 0; i < g.n && g.node(i) <= st.r_support; ++i) {
    if (st.phi.values[i] > st.lambda) rep.potential_below_lambda = false;
    if (i > 0 && !(st.phi.values[i] > st.phi.values[i - 1])) rep.potential_increasing = false;
  }
  rep.ok = rep.max_outside == 0.0 && rep.potential_below_lambda && rep.potential_increasing;
  return rep;
}

}  // namespace vg
