#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "vg/rigidity.hpp"

using namespace vg;

namespace {

PhaseDensity smooth_trial(std::size_t n = 301) {
  TrialBox box;
  box.n = box.m = n;
  return make_trial(TrialFamily::ellipsoid, {4.0}, box);
}

// F(s) from its definition, integrated in q.
double f_oracle(double c, double a, const CasimirSpec& spec, double s) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto g = [&](double q) {
    const double y = 1.0 + s * q / (c * c);
    return y * std::sqrt(y * y - 1.0) * spec.eval_g_inv(a - q);
  };
  return c / s * ts.integrate(g, 0.0, a, 1e-14);
}

}  // namespace

TEST_SUITE("rigidity") {

TEST_CASE("trial families") {
  for (auto f : {TrialFamily::ground_state, TrialFamily::ellipsoid, TrialFamily::separable, TrialFamily::box,
                 TrialFamily::gaussian})
    CHECK(trial_family_from_string(to_string(f)) == f);
  CHECK_THROWS_AS(trial_family_from_string("nope"), DomainError);
  CHECK_THROWS_AS(make_trial(TrialFamily::ground_state, {}), DomainError);
  const PhaseDensity e = make_trial(TrialFamily::ellipsoid, {1.0});
  CHECK(e.sup() == 1.0);
  CHECK(e.support_radius() <= 1.0);
}

TEST_CASE("quotient of the box trial") {
  const CasimirSpec spec = make_polytrope(2.0);
  TrialBox box;
  box.n = box.m = 401;
  const PhaseDensity f = make_trial(TrialFamily::box, {}, box);
  const double m1 = std::pow(4.0 * kPi / 3.0, 2);
  const double speed = 4.0 * kPi * kPi / 3.0;
  const double grad2 = 1.2 * m1 * m1 / (4.0 * kPi);
  const double expected = speed * std::cbrt(m1) * std::cbrt(m1) / grad2;
  CHECK(interpolation_quotient(f, spec, ModelParams::relativistic(1.0), QuotientKind::relativistic) ==
        doctest::Approx(expected).epsilon(2e-2));
}

TEST_CASE("quotient is invariant under dilation") {
  const CasimirSpec spec = make_polytrope(2.0);
  const ModelParams mp = ModelParams::relativistic(1.0);
  const PhaseDensity f = smooth_trial();
  for (auto kind : {QuotientKind::relativistic, QuotientKind::classical}) {
    const double q0 = interpolation_quotient(f, spec, mp, kind);
    for (double lam : {0.25, 0.5, 2.0, 4.0}) {
      const ScalingReport rep = dilate_transform(f, lam, spec, mp);
      CHECK(interpolation_quotient(rep.transformed, spec, mp, kind) == doctest::Approx(q0).epsilon(1e-6));
    }
    // resampled onto a common grid
    const auto target = std::make_pair(RadialGrid::make(3.0, 601), SpeedGrid::make(1.25, 401));
    const ScalingReport rs = dilate_transform(f, 2.0, spec, mp, target);
    CHECK(interpolation_quotient(rs.transformed, spec, mp, kind) == doctest::Approx(q0).epsilon(1e-4));
  }
}

TEST_CASE("dilate_transform predictions") {
  const CasimirSpec spec = make_polytrope(3.0);
  for (double c : {0.5, 1.0, std::numeric_limits<double>::infinity()}) {
    CAPTURE(c);
    const ModelParams mp{c};
    const PhaseDensity f = smooth_trial(1201);
    for (double lam : {0.5, 3.0}) CHECK(dilate_transform(f, lam, spec, mp).max_relative_gap < 1e-12);
    // epot limits the resampled case (second-order Poisson discretization)
    const auto target = std::make_pair(RadialGrid::make(2.5, 801), SpeedGrid::make(1.25, 801));
    CHECK(dilate_transform(f, 1.5, spec, mp, target).max_relative_gap < 1e-5);
  }
  CHECK_THROWS_AS(dilate_transform(smooth_trial(), 4.0, spec, ModelParams{},
                                   std::make_pair(RadialGrid::make(2.0, 101), SpeedGrid::make(1.25, 101))),
                  DomainError);
}

TEST_CASE("alpha rescale") {
  const ModelParams mp = ModelParams::relativistic(1.0);
  const PhaseDensity f = smooth_trial();
  SUBCASE("polytrope: h = alpha^{p-1}") {
    const CasimirSpec spec = make_polytrope(2.5);
    for (double alpha : {0.3, 2.0, 7.0}) {
      const ScalingReport rep = alpha_rescale(f, alpha, spec, mp);
      CHECK(rep.h_alpha == doctest::Approx(std::pow(alpha, 1.5)).epsilon(1e-12));
      CHECK(rep.max_relative_gap < 1e-12);
      CHECK(rep.dichotomy_ok);
    }
    const ScalingReport k = alpha_rescale(f, 0.25, spec, mp, true);
    CHECK(k.h_alpha == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(k.parameter == doctest::Approx(std::pow(4.0, 1.0 / 1.5)).epsilon(1e-12));
  }
  SUBCASE("two-power Casimir stays between its exponents") {
    CasimirSpec spec;
    spec.j = [](double t) { return t * t + t * t * t; };
    spec.j_prime = [](double t) { return 2.0 * t + 3.0 * t * t; };
    spec.g_inv = [](double y) { return y <= 0.0 ? 0.0 : (-2.0 + std::sqrt(4.0 + 12.0 * y)) / 6.0; };
    spec.p = spec.p1 = 2.0;
    spec.p2 = 3.0;
    for (double alpha : {0.2, 1.7, 12.0}) {
      const ScalingReport rep = alpha_rescale(f, alpha, spec, mp);
      CHECK(rep.dichotomy_ok);
      CHECK(rep.max_relative_gap < 1e-12);
    }
  }
}

TEST_CASE("no dichotomy gain") {
  for (double p : {1.6, 2.0, 3.0, 6.0})
    for (int i = 1; i < 20; ++i)
      for (int j = 1; j < 20; ++j) CHECK(nondichotomy_sum(i / 20.0, j / 20.0, p, p) < 1.0);
  CHECK(nondichotomy_sum(1.0, 1.0, 2.0, 2.0) == 1.0);
}

TEST_CASE("K_j estimate and threshold") {
  const CasimirSpec spec = make_polytrope(2.0);
  const ModelParams mp = ModelParams::relativistic(1.0);
  KjOptions opt;
  opt.budget = 40;
  const KjEstimate est = estimate_kj(spec, mp, opt);
  CHECK(est.best_quotient > 0.0);
  CHECK(est.best_quotient <= interpolation_quotient(make_trial(TrialFamily::box, {}), spec, mp));
  CHECK_FALSE(est.witness.empty());

  const ThresholdVerdict cl = threshold_check(1.0, 1.0, spec, ModelParams{}, est);
  CHECK(cl.classical);
  CHECK(cl.verdict == "classical: no threshold");

  // Increasing a mass never turns supercritical into subcritical.
  for (double m : {0.5, 1.0, 2.0}) {
    bool super1 = false, superj = false;
    for (int k = 0; k < 40; ++k) {
      const double x = std::pow(10.0, -2.0 + k / 6.0);
      const ThresholdVerdict v1 = threshold_check(x, m, spec, mp, est);
      const ThresholdVerdict vj = threshold_check(m, x, spec, mp, est);
      if (super1) CHECK_FALSE(v1.below_estimate);
      if (superj) CHECK_FALSE(vj.below_estimate);
      super1 = super1 || !v1.below_estimate;
      superj = superj || !vj.below_estimate;
    }
    CHECK(super1);
    CHECK(superj);
  }
}

TEST_CASE("F against its definition") {
  for (double p : {2.0, 3.0})
    for (double c : {1.0, 10.0})
      for (double a : {0.5, 2.0})
        for (double s : {0.1, 1.0, 10.0}) {
          const CasimirSpec spec = make_polytrope(p);
          CAPTURE(p);
          CAPTURE(c);
          CAPTURE(a);
          CAPTURE(s);
          CHECK(f_function(ModelParams{c}, a, spec, s) == doctest::Approx(f_oracle(c, a, spec, s)).epsilon(1e-10));
        }
}

TEST_CASE("F second derivative and convexity") {
  const CasimirSpec spec = make_polytrope(2.0);
  for (double c : {0.5, 3.0}) {
    const ModelParams mp{c};
    for (double s : {0.05, 1.0, 20.0}) {
      const double h = 1e-3 * s;
      const double fd = (f_function(mp, 1.0, spec, s + h) - 2.0 * f_function(mp, 1.0, spec, s) +
                         f_function(mp, 1.0, spec, s - h)) / (h * h);
      CHECK(f_function_second(mp, 1.0, spec, s) == doctest::Approx(fd).epsilon(1e-5));
    }
    std::vector<double> F;
    for (int k = 0; k < 64; ++k) F.push_back(f_function(mp, 1.0, spec, std::pow(10.0, -3.0 + 6.0 * k / 63.0)));
    // convexity on the log grid: increasing chord slopes
    for (std::size_t k = 1; k + 1 < F.size(); ++k) {
      const double s0 = std::pow(10.0, -3.0 + 6.0 * (k - 1) / 63.0), s1 = std::pow(10.0, -3.0 + 6.0 * k / 63.0),
                   s2 = std::pow(10.0, -3.0 + 6.0 * (k + 1) / 63.0);
      CHECK((F[k + 1] - F[k]) / (s2 - s1) > (F[k] - F[k - 1]) / (s1 - s0));
    }
  }
  CHECK_THROWS_AS(f_function(ModelParams{}, 1.0, spec, 1.0), DomainError);
}

TEST_CASE("F roots") {
  const CasimirSpec spec = make_polytrope(2.0);
  const FRoots r = f_roots(ModelParams{1.0}, 1.0, spec, -0.7);
  CHECK(r.roots.size() <= 2);
  CHECK(std::find(r.roots.begin(), r.roots.end(), 0.7) != r.roots.end());
  for (double s : r.roots)
    CHECK(f_function(ModelParams{1.0}, 1.0, spec, s) ==
          doctest::Approx(f_function(ModelParams{1.0}, 1.0, spec, 0.7)).epsilon(1e-9));
}

TEST_CASE("F sqrt(s) is flat at large c") {
  const CasimirSpec spec = make_polytrope(2.0);
  const ModelParams mp{1e4};
  const double ref = f_function(mp, 1.0, spec, 1.0);
  for (double s : {1e-3, 1e-1, 10.0, 1e3}) CHECK(f_function(mp, 1.0, spec, s) * std::sqrt(s) == doctest::Approx(ref).epsilon(1e-2));
}

TEST_CASE("equimeasurability") {
  const PhaseDensity f = smooth_trial();
  const CasimirSpec spec = make_polytrope(2.0);
  std::vector<double> levels;
  for (int k = 1; k < 20; ++k) levels.push_back(k / 20.0);
  CHECK(equimeasure_compare(f, f, levels).max_discrepancy == 0.0);
  const PhaseDensity d = dilate_transform(f, 2.0, spec, ModelParams{}).transformed;
  const EquimeasureReport same = equimeasure_compare(f, d, levels);
  CHECK(same.max_discrepancy <= 1e-12 * same.dist_f.front());
  PhaseDensity twice = f;
  for (double& x : twice.values()) x *= 2.0;
  const EquimeasureReport diff = equimeasure_compare(f, twice, levels);
  CHECK(diff.max_discrepancy > 0.1 * diff.dist_f.front());
  CHECK(diff.sup_g == 2.0 * diff.sup_f);
}

TEST_CASE("bootstrap recursion") {
  const BootstrapResult p3 = bootstrap_exponents(3.0, 1.2);
  CHECK(p3.q.at(1) == doctest::Approx(6.0 * 1.2 / (7.0 * 0.6)).epsilon(1e-15));
  CHECK(p3.first_above == 1u);
  const BootstrapResult p2 = bootstrap_exponents(2.0, 1.2);
  CHECK(p2.boundary_hit);
  CHECK(p2.q.at(1) == doctest::Approx(1.5).epsilon(1e-14));
  for (double p : {1.6, 2.0, 3.0, 5.0}) {
    const BootstrapResult b = bootstrap_exponents(p, 1.2);
    CHECK(b.fixed_point == doctest::Approx(3.0 * (2.0 * p - 1.0) / (2.0 * (3.0 * p - 2.0))));
    // repelling upward
    const BootstrapResult up = bootstrap_exponents(p, std::min(1.49, b.fixed_point + 1e-3));
    if (up.q.size() > 1) CHECK(up.q[1] > up.q[0]);
  }
  for (int k = 1; k <= 85; ++k) {
    const double p = 1.5 + 0.1 * k;
    CAPTURE(p);
    const BootstrapResult b = bootstrap_exponents(p, 1.2);
    CHECK(b.first_above.has_value());
  }
  CHECK_THROWS_AS(bootstrap_exponents(1.4), DomainError);
  CHECK_THROWS_AS(bootstrap_exponents(2.0, 1.6), DomainError);
}

}
