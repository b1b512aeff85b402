#include <doctest.h>

#include <array>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "vg/steady.hpp"

using namespace vg;

namespace {

struct LaneEmden {
  double xi1 = 0.0;    // first zero
  double slope = 0.0;  // xi1^2 |theta'(xi1)|
};

// theta'' + 2 theta'/xi = -theta^n with theta(0) = 1, theta'(0) = 0.
LaneEmden lane_emden(double n) {
  using S = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  auto rhs = [n](const S& y, S& dy, double xi) {
    dy[0] = y[1];
    dy[1] = -std::pow(std::max(y[0], 0.0), n) - 2.0 * y[1] / xi;
  };
  const double xi0 = 1e-4;
  S y{1.0 - xi0 * xi0 / 6.0 + n * std::pow(xi0, 4) / 120.0, -xi0 / 3.0 + n * std::pow(xi0, 3) / 30.0};
  auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<S>());
  stepper.initialize(y, xi0, 1e-3);
  while (stepper.current_state()[0] > 0.0) stepper.do_step(rhs);
  double lo = stepper.previous_time(), hi = stepper.current_time();
  S mid;
  for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
    const double m = 0.5 * (lo + hi);
    stepper.calc_state(m, mid);
    (mid[0] > 0.0 ? lo : hi) = m;
  }
  stepper.calc_state(hi, mid);
  return {hi, hi * hi * std::abs(mid[1])};
}

// rho(psi) = K |psi|^n for the classical polytrope; K by direct quadrature.
double density_constant(const CasimirSpec& spec, double mu) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return 4.0 * kPi * ts.integrate([&](double u) { return spec.eval_g_inv((1.0 - 0.5 * u * u) / std::abs(mu)) * u * u; },
                                  0.0, std::sqrt(2.0));
}

GroundState shoot(double p, double c, double psi0, double mu, std::size_t n = 4096) {
  const CasimirSpec spec = make_polytrope(p);
  const ModelParams mp{c};
  return integrate_state(spec, mp, psi0, mu, fitted_grid(spec, mp, psi0, mu, n));
}

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_SUITE("steady") {

TEST_CASE("classical polytropes match Lane-Emden") {
  for (double p : {2.0, 3.0}) {
    CAPTURE(p);
    const double n = 1.5 + 1.0 / (p - 1.0);
    const LaneEmden le = lane_emden(n);
    for (double psi0 : {-1.0, -2.5}) {
      const double mu = -0.7;
      const GroundState st = shoot(p, kInf, psi0, mu);
      const double A = std::abs(psi0);
      const double alpha = std::sqrt(density_constant(st.spec, mu) * std::pow(A, n - 1.0));
      CHECK(st.r_support == doctest::Approx(le.xi1 / alpha).epsilon(1e-6));
      CHECK(st.m1 == doctest::Approx(4.0 * kPi * A * le.slope / alpha).epsilon(1e-6));
      CHECK(st.rho_center() == doctest::Approx(density_constant(st.spec, mu) * std::pow(A, n)).epsilon(1e-8));
    }
  }
}

TEST_CASE("mass along psi0 follows the homology scaling") {
  // Classical: M ~ |psi0|^{(3-n)/2}; decreasing once n > 3, i.e. p < 7/4.
  for (double p : {1.6, 2.0, 3.0}) {
    CAPTURE(p);
    const double n = 1.5 + 1.0 / (p - 1.0);
    const GroundState a = shoot(p, kInf, -1.0, -1.0), b = shoot(p, kInf, -2.0, -1.0);
    CHECK(b.m1 / a.m1 == doctest::Approx(std::pow(2.0, 0.5 * (3.0 - n))).epsilon(1e-6));
  }
  // Relativistic p = 2: recorded as increasing over the sampled family.
  double prev = 0.0;
  for (double psi0 : {-0.05, -0.1, -0.2, -0.4}) {
    const GroundState st = shoot(2.0, 1.0, psi0, -1.0, 2048);
    CHECK(st.m1 > prev);
    prev = st.m1;
  }
}

TEST_CASE("solve_targets hits the masses and the sign conditions") {
  for (double c : {1.0, kInf}) {
    CAPTURE(c);
    const CasimirSpec spec = make_polytrope(2.0);
    const GroundState st = solve_targets(spec, ModelParams{c}, {1.0, 1.0, 1e-10});
    CHECK(st.m1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(st.mj == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(st.lambda < 0.0);
    CHECK(st.mu < 0.0);
    CHECK(st.hc < 0.0);
    CHECK(st.hc == doctest::Approx(st.ekin - st.epot));

    const SupportReport sup = support_check(st);
    CHECK(sup.ok);
    CHECK(sup.potential_increasing);
    CHECK(sup.max_outside == 0.0);

    const IdentityResiduals id = multiplier_identities(st);
    CHECK(id.max_abs() < 1e-4);
    CHECK(id.mf < 1e-12);
    CHECK(id.mu_negative);
    CHECK(id.lambda_negative);
    CHECK(id.convexity_positive);
    CHECK(id.muj_sign);
    CHECK(st.integrals.negative > 0.0);
    CHECK(std::abs(id.inegatif) < 1e-6);

    CHECK(self_consistency_residual(st) < 1e-4);
  }
}

TEST_CASE("identity residuals decrease under refinement") {
  const GroundState ref = shoot(2.0, 1.0, -0.3, -1.0);
  double prev = 1.0;
  for (std::size_t n : {256, 512, 1024, 2048}) {
    const GroundState st = integrate_state(ref.spec, ref.params, ref.psi0, ref.mu, RadialGrid::make(ref.phi.grid.max, n));
    const double e = multiplier_identities(st).el1;
    CHECK(std::abs(e) < prev / 3.0);
    prev = std::abs(e);
  }
}

TEST_CASE("fixed point and shooting agree at matched multipliers") {
  const GroundState sh = shoot(2.0, 1.0, -0.2, -1.0, 2048);
  const GroundState fp = fixed_point_solve(sh.spec, sh.params, sh.lambda, sh.mu, sh.phi.grid);
  double d = 0.0;
  for (std::size_t i = 0; i < sh.phi.grid.n; ++i) d = std::max(d, std::abs(fp.phi.values[i] - sh.phi.values[i]));
  CHECK(d / std::abs(sh.phi.values[0]) < 1e-4);
  CHECK(fp.m1 == doctest::Approx(sh.m1).epsilon(1e-4));
  CHECK(fp.mj == doctest::Approx(sh.mj).epsilon(1e-4));
  CHECK(fp.hc == doctest::Approx(sh.hc).epsilon(1e-4));
}

TEST_CASE("damped Picard iteration does not converge at a ground state") {
  const GroundState sh = shoot(2.0, 1.0, -0.2, -1.0, 1024);
  FixedPointOptions opt;
  opt.method = FixedPointMethod::picard;
  opt.damping = 0.5;
  opt.initial = sh.phi;
  opt.max_iter = 400;
  CHECK_THROWS_AS(fixed_point_solve(sh.spec, sh.params, sh.lambda, sh.mu, sh.phi.grid, opt), NumericalError);
}

TEST_CASE("state_from_potential reproduces the shooting state") {
  const GroundState sh = shoot(3.0, 2.0, -0.5, -1.0);
  const GroundState st = state_from_potential(sh.spec, sh.params, sh.lambda, sh.mu, sh.phi);
  CHECK(st.m1 == doctest::Approx(sh.m1).epsilon(1e-6));
  CHECK(st.mj == doctest::Approx(sh.mj).epsilon(1e-6));
}

TEST_CASE("precondition errors") {
  const CasimirSpec spec = make_polytrope(2.0);
  const RadialGrid g = RadialGrid::make(10.0, 512);
  CHECK_THROWS_AS(integrate_state(spec, ModelParams{}, -1.0, 1.0, g), DomainError);
  CHECK_THROWS_AS(integrate_state(spec, ModelParams{}, 1.0, -1.0, g), DomainError);
  CHECK_THROWS_AS(solve_targets(spec, ModelParams{}, {-1.0, 1.0, 1e-8}), DomainError);
  CHECK_THROWS_AS(fixed_point_solve(spec, ModelParams{}, 0.5, -1.0, g), DomainError);
}

}
