#include <algorithm>
#include <cmath>
#include <string>

#include "steady_detail.hpp"
#include "vg/parallel.hpp"

namespace vg {

namespace {

// Finite-volume potential of poisson_solve without its input checks, so that
// intermediate iterates whose density reaches r_max can still be scored.
std::vector<double> fv_potential(const RadialGrid& g, const std::vector<double>& vol, const std::vector<double>& rho) {
  const std::size_t n = g.n;
  const double h = g.h();
  std::vector<double> flux(n, 0.0);
  double enclosed = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) flux[i] = enclosed += vol[i] * rho[i];
  std::vector<double> phi(n);
  phi[n - 1] = -(enclosed + vol[n - 1] * rho[n - 1]) / g.max;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double mid = g.node(i) + 0.5 * h;
    phi[i] = phi[i + 1] - h * flux[i] / (mid * mid);
  }
  return phi;
}

// Solves a tridiagonal system in place (Thomas algorithm).
void thomas(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0) throw NumericalError("fixed_point_solve: singular Newton system");
    const double m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0) throw NumericalError("fixed_point_solve: singular Newton system");
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

GroundState state_from_potential(const CasimirSpec& spec, const ModelParams& params, double lambda, double mu,
                                 const RadialField& phi, const TabulationOptions& tab) {
  if (!(lambda < 0.0)) throw DomainError("state_from_potential: lambda must be negative");
  if (!(mu < 0.0)) throw DomainError("state_from_potential: mu must be negative");
  const RadialGrid& g = phi.grid;
  const double psi0 = phi.values.front() - lambda;
  if (!(psi0 < 0.0)) {
    GroundState st = detail::trivial_state(spec, params, mu, g, tab, "fixed_point");
    st.lambda = lambda;
    return st;
  }
  GroundState st;
  st.params = params;
  st.spec = spec;
  st.lambda = lambda;
  st.mu = mu;
  st.psi0 = psi0;
  st.a = psi0 / mu;
  st.phi = phi;
  st.route = "fixed_point";

  std::size_t first_out = g.n;
  for (std::size_t i = 0; i < g.n; ++i) {
    if (phi.values[i] - lambda >= 0.0) {
      first_out = i;
      break;
    }
  }
  if (first_out == g.n) throw NumericalError("state_from_potential: support exceeds grid");
  const double pa = phi.values[first_out - 1] - lambda, pb = phi.values[first_out] - lambda;
  st.r_support = g.node(first_out - 1) + g.h() * (-pa) / (pb - pa);

  const MomentEvaluator ev(spec, params, mu, tab.moment_tol);
  st.rho = RadialField::zeros(g);
  parallel_for(first_out, [&](std::size_t i) { st.rho.values[i] = ev.density(phi.values[i] - lambda); });

  st.integrals = grid_integrals(st, tab.moment_tol);
  st.m1 = st.integrals.m1;
  st.mj = st.integrals.mj;
  st.ekin = st.integrals.ekin;
  st.epot = st.integrals.grad_energy;
  st.hc = st.ekin - st.epot;
  st.f = detail::tabulate_q(st, tab);
  return st;
}

GroundState fixed_point_solve(const CasimirSpec& spec, const ModelParams& params, double lambda, double mu,
                              const RadialGrid& grid, const FixedPointOptions& opt) {
  if (!(lambda < 0.0)) throw DomainError("fixed_point_solve: lambda must be negative, otherwise the support is empty");
  if (!(mu < 0.0)) throw DomainError("fixed_point_solve: mu must be negative");
  if (grid.n < 3) throw DomainError("fixed_point_solve: grid needs at least 3 nodes");
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw DomainError("fixed_point_solve: damping must lie in (0, 1]");

  const std::size_t n = grid.n;
  const double h = grid.h();
  const auto vol = shell_volumes(grid);
  const MomentEvaluator ev(spec, params, mu, opt.tab.moment_tol);

  auto density = [&](const std::vector<double>& p) {
    std::vector<double> rho(n);
    parallel_for(n, [&](std::size_t i) { rho[i] = ev.density(p[i] - lambda); });
    return rho;
  };
  auto score = [&](const std::vector<double>& p, const std::vector<double>& rho) {
    const auto q = fv_potential(grid, vol, rho);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(p[i] - q[i]));
    return std::abs(p[0]) > 0.0 ? d / std::abs(p[0]) : std::numeric_limits<double>::infinity();
  };
  auto empty = [](const std::vector<double>& rho) {
    return std::all_of(rho.begin(), rho.end(), [](double v) { return v == 0.0; });
  };

  auto iterate = [&](std::vector<double> phi) {
    std::vector<double> rho = density(phi);
    if (empty(rho)) throw NumericalError("fixed_point_solve: initial guess carries no density");
    double res = score(phi, rho);
    std::size_t it = 0;
    while (!(res < opt.tol)) {
      if (++it > opt.max_iter) throw NumericalError("fixed_point_solve: divergence, no convergence within max_iter");
      std::vector<double> next(n);
      if (opt.method == FixedPointMethod::picard) {
        const auto q = fv_potential(grid, vol, rho);
        for (std::size_t i = 0; i < n; ++i) next[i] = (1.0 - opt.damping) * phi[i] + opt.damping * q[i];
      } else {
        // Residual rows of A phi - V rho(phi) = 0, A the finite-volume operator.
        std::vector<double> m2(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) m2[i] = std::pow(grid.node(i) + 0.5 * h, 2) / h;
        std::vector<double> drho(n, 0.0);
        parallel_for(n, [&](std::size_t i) {
          const double psi = phi[i] - lambda;
          if (!(psi < 0.0)) return;
          const double d = 1e-6 * std::abs(psi);
          drho[i] = (ev.density(psi + d) - ev.density(psi - d)) / (2.0 * d);
        });
        std::vector<double> sub(n, 0.0), diag(n), sup(n, 0.0), rhs(n);
        for (std::size_t i = 0; i + 1 < n; ++i) {
          double row = m2[i] * (phi[i + 1] - phi[i]) - vol[i] * rho[i];
          diag[i] = -m2[i] - vol[i] * drho[i];
          sup[i] = m2[i];
          if (i > 0) {
            row -= m2[i - 1] * (phi[i] - phi[i - 1]);
            diag[i] -= m2[i - 1];
            sub[i] = m2[i - 1];
          }
          rhs[i] = -row;
        }
        rhs[n - 1] = -(grid.max * phi[n - 1] + m2[n - 2] * (phi[n - 1] - phi[n - 2]) + vol[n - 1] * rho[n - 1]);
        diag[n - 1] = grid.max + m2[n - 2] + vol[n - 1] * drho[n - 1];
        sub[n - 1] = -m2[n - 2];
        thomas(sub, diag, sup, rhs);
        double t = 1.0;
        for (int halving = 0;; ++halving, t *= 0.5) {
          for (std::size_t i = 0; i < n; ++i) next[i] = phi[i] + t * rhs[i];
          const auto r_next = density(next);
          if (!empty(r_next) && score(next, r_next) < res) break;
          if (halving == 30) throw NumericalError("fixed_point_solve: Newton line search failed");
        }
      }
      phi = std::move(next);
      rho = density(phi);
      if (empty(rho)) throw NumericalError("fixed_point_solve: iteration collapsed to the trivial state");
      res = score(phi, rho);
    }
    if (rho.back() > 0.0) throw NumericalError("fixed_point_solve: support exceeds grid");
    return phi;
  };

  std::vector<double> phi;
  if (opt.initial) {
    if (!(opt.initial->grid == grid)) throw DomainError("fixed_point_solve: initial guess lives on another grid");
    phi = iterate(opt.initial->values);
  } else {
    // Seed: self-consistent-field iteration at a fixed central depth psi0,
    // letting lambda float, with a secant search on psi0 for the requested
    // lambda. Newton at fixed lambda then polishes.
    const double b = opt.guess_width * grid.max;
    std::vector<double> shape(n);
    for (std::size_t i = 0; i < n; ++i) shape[i] = 3.0 * lambda / std::sqrt(1.0 + std::pow(grid.node(i) / b, 2));
    auto scf = [&](double psi0) {
      std::vector<double> rho(n);
      for (std::size_t it = 0; it < 5000; ++it) {
        const double lam_k = shape[0] - psi0;
        parallel_for(n, [&](std::size_t i) { rho[i] = ev.density(shape[i] - lam_k); });
        const auto q = fv_potential(grid, vol, rho);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(q[i] - shape[i]));
        shape = q;
        if (change < 1e-10 * std::abs(q[0])) return shape[0] - psi0;
      }
      throw NumericalError("fixed_point_solve: self-consistent-field seed did not converge");
    };
    double x0 = std::log(-2.0 * lambda), x1 = std::log(-3.0 * lambda);
    double f0 = std::log(scf(-std::exp(x0)) / lambda);
    double f1 = std::log(scf(-std::exp(x1)) / lambda);
    for (int k = 0; k < 40 && std::abs(f1) > 1e-10; ++k) {
      if (f1 == f0) throw NumericalError("fixed_point_solve: stalled seed search");
      const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
      x0 = x1, f0 = f1;
      x1 = std::clamp(x2, x1 - 2.0, x1 + 2.0);
      f1 = std::log(scf(-std::exp(x1)) / lambda);
    }
    phi = iterate(shape);
  }
  return state_from_potential(spec, params, lambda, mu, RadialField{grid, phi}, opt.tab);
}

}  // namespace vg
