#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <filesystem>

#include "vg/radial.hpp"

using namespace vg;

namespace {

// rho = (1 - r^2)^2 on r <= 1 and its exact potential.
RadialField smooth_rho(const RadialGrid& g) {
  RadialField f = RadialField::zeros(g);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double r = g.node(i);
    f.values[i] = r < 1.0 ? (1.0 - r * r) * (1.0 - r * r) : 0.0;
  }
  return f;
}

double smooth_phi(double r) {
  const double m = 1.0 / 3.0 - 2.0 / 5.0 + 1.0 / 7.0;  // M / (4 pi)
  if (r >= 1.0) return -m / r;
  auto prim = [](double s) { return s * s / 6.0 - std::pow(s, 4) / 10.0 + std::pow(s, 6) / 42.0; };
  return -m - (prim(1.0) - prim(r));
}

double max_phi_error(std::size_t n) {
  const RadialGrid g = RadialGrid::make(2.0, n);
  const RadialField phi = poisson_solve(smooth_rho(g));
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(phi.values[i] - smooth_phi(g.node(i))));
  return e;
}

// (1 - r^2 - u^2)_+ on [0, 1.5]^2
PhaseDensity ellipsoid(std::size_t n) {
  return PhaseDensity::tabulate(RadialGrid::make(1.5, n), SpeedGrid::make(1.5, n),
                                [](double r, double u) { return std::max(0.0, 1.0 - r * r - u * u); });
}

PhaseDensity smooth_phase(std::size_t n) {
  return PhaseDensity::tabulate(RadialGrid::make(1.5, n), SpeedGrid::make(1.5, n), [](double r, double u) {
    const double s = 1.0 - r * r - u * u;
    return s > 0.0 ? s * s * s * s : 0.0;
  });
}

}  // namespace

TEST_SUITE("radial") {

TEST_CASE("grid basics") {
  const RadialGrid g = RadialGrid::make(2.0, 5);
  CHECK(g.h() == 0.5);
  CHECK(g.node(4) == 2.0);
  CHECK_THROWS_AS(RadialGrid::make(1.0, 1), DomainError);
}

TEST_CASE("shell volumes add up to the ball") {
  const RadialGrid g = RadialGrid::make(3.0, 301);
  double s = 0.0;
  for (double v : shell_volumes(g)) s += v;
  CHECK(4.0 * kPi * s == doctest::Approx(4.0 * kPi * 27.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("poisson_solve matches the closed-form potential at second order") {
  const double e1 = max_phi_error(201), e2 = max_phi_error(401);
  CHECK(e2 < 1e-5);
  CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("potential is nondecreasing and nonpositive") {
  const RadialGrid g = RadialGrid::make(2.0, 301);
  for (double w : {0.2, 0.5, 0.9}) {
    RadialField rho = RadialField::zeros(g);
    for (std::size_t i = 0; i < g.n; ++i) rho.values[i] = std::exp(-std::pow(g.node(i) / w, 2)) * (g.node(i) < 1.0);
    rho.values.back() = 0.0;
    const RadialField phi = poisson_solve(rho);
    for (std::size_t i = 0; i < g.n; ++i) {
      CHECK(phi.values[i] <= 0.0);
      if (i) CHECK(phi.values[i] >= phi.values[i - 1]);
    }
  }
}

TEST_CASE("gradient energy against the closed form and the second route") {
  const RadialGrid g = RadialGrid::make(2.0, 801);
  const RadialField rho = smooth_rho(g);
  const RadialField phi = poisson_solve(rho);
  const double m = 1.0 / 3.0 - 2.0 / 5.0 + 1.0 / 7.0;
  auto dphi = [](double r) { return r / 3.0 - 2.0 * std::pow(r, 3) / 5.0 + std::pow(r, 5) / 7.0; };
  const double inside = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double r) { return 0.5 * 4.0 * kPi * r * r * dphi(r) * dphi(r); }, 0.0, 1.0, 10, 1e-14);
  const double exact = inside + 0.5 * 4.0 * kPi * m * m;
  CHECK(gradient_energy(phi) == doctest::Approx(exact).epsilon(1e-5));
  CHECK(gradient_energy_from_density(phi, rho) == doctest::Approx(gradient_energy(phi)).epsilon(1e-6));
}

TEST_CASE("density moment of the ellipsoid") {
  const PhaseDensity f = ellipsoid(601);
  const RadialField rho = density_moment(f);
  for (std::size_t i = 0; i < f.grid_r().n; i += 40) {
    const double r = f.grid_r().node(i);
    const double a2 = std::max(0.0, 1.0 - r * r);
    CHECK(rho.values[i] == doctest::Approx(4.0 * kPi * 2.0 / 15.0 * std::pow(a2, 2.5)).epsilon(2e-3).scale(1e-3));
  }
}

TEST_CASE("functionals of the ellipsoid") {
  const PhaseDensity f = ellipsoid(801);
  const FunctionalReport r = functionals(f, make_polytrope(2.0), ModelParams::classical());
  CHECK(r.m1 == doctest::Approx(std::pow(kPi, 3) / 24.0).epsilon(1e-4));
  CHECK(r.hc == doctest::Approx(r.ekin - r.epot));
}

TEST_CASE("functionals converge at second order") {
  const CasimirSpec spec = make_polytrope(2.0);
  const ModelParams mp = ModelParams::relativistic(1.0);
  const FunctionalReport a = functionals(smooth_phase(101), spec, mp);
  const FunctionalReport b = functionals(smooth_phase(201), spec, mp);
  const FunctionalReport c = functionals(smooth_phase(401), spec, mp);
  // changes already at rounding level count as converged
  auto second_order = [](double x, double y, double z) {
    return std::abs(y - z) <= 1e-13 * std::abs(z) || std::log2(std::abs(x - y) / std::abs(y - z)) >= 1.8;
  };
  CHECK(second_order(a.m1, b.m1, c.m1));
  CHECK(second_order(a.mj, b.mj, c.mj));
  CHECK(second_order(a.ekin, b.ekin, c.ekin));
  CHECK(second_order(a.epot, b.epot, c.epot));
  CHECK(std::log2(std::abs(a.epot - b.epot) / std::abs(b.epot - c.epot)) >= 1.8);
}

TEST_CASE("distribution function of the ellipsoid") {
  const PhaseDensity f = ellipsoid(801);
  std::vector<double> levels;
  for (int k = 0; k <= 20; ++k) levels.push_back(0.05 * k);
  const auto d = distribution_function(f, levels);
  for (std::size_t k = 1; k < levels.size(); ++k) CHECK(d[k] <= d[k - 1]);
  for (std::size_t k = 2; k + 2 < levels.size(); k += 4)
    CHECK(d[k] == doctest::Approx(std::pow(kPi, 3) / 6.0 * std::pow(1.0 - levels[k], 3)).epsilon(5e-3));
  CHECK(d.back() == 0.0);
}

TEST_CASE("ej distance is a symmetric distance") {
  const PhaseDensity f = ellipsoid(101), g = smooth_phase(101);
  const CasimirSpec spec = make_polytrope(2.0);
  const ModelParams mp = ModelParams::relativistic(1.0);
  CHECK(ej_distance(f, f, spec, mp) == 0.0);
  CHECK(ej_distance(f, g, spec, mp) == doctest::Approx(ej_distance(g, f, spec, mp)));
  CHECK(ej_distance(f, g, spec, mp) > 0.0);
}

TEST_CASE("csv round trip is exact") {
  const auto dir = std::filesystem::temp_directory_path() / "vg_radial_csv";
  std::filesystem::create_directories(dir);
  const PhaseDensity f = smooth_phase(33);
  write_csv(f, dir / "f.csv");
  const PhaseDensity g = read_phase_csv(dir / "f.csv");
  CHECK(std::equal(f.values().begin(), f.values().end(), g.values().begin()));
  const RadialField rho = density_moment(f);
  write_csv(rho, dir / "rho.csv");
  CHECK(read_radial_csv(dir / "rho.csv").values == rho.values);
}

TEST_CASE("validation of phase densities") {
  PhaseDensity f = smooth_phase(21);
  CHECK_NOTHROW(f.validate());
  f.at(3, 3) = -1.0;
  CHECK_THROWS_AS(f.validate(), DomainError);
}

}
