#include "vg/moments.hpp"

#include <algorithm>
#include <array>

#include "vg/quadrature.hpp"

namespace vg {

namespace {

// Small fixed-size vector so that several moments share one adaptive
// Gauss-Kronrod pass. abs() is the max norm, as required by the boost driver.
template <std::size_t K>
struct Vec {
  std::array<double, K> v{};
  Vec() = default;
  Vec(double fill) { v.fill(fill); }  // NOLINT(google-explicit-constructor)
  Vec& operator+=(const Vec& o) {
    for (std::size_t k = 0; k < K; ++k) v[k] += o.v[k];
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) {
    for (std::size_t k = 0; k < K; ++k) a.v[k] -= b.v[k];
    return a;
  }
  friend Vec operator-(Vec a) { return a * -1.0; }
  friend Vec operator*(Vec a, double s) {
    for (auto& x : a.v) x *= s;
    return a;
  }
  friend Vec operator*(double s, Vec a) { return a * s; }
  friend double abs(const Vec& a) {
    double m = 0.0;
    for (double x : a.v) m = std::max(m, std::abs(x));
    return m;
  }
};

struct Kinematics {
  double base;  // velocity volume element and Jacobian, times 4 pi
  double e;     // gamma_c
  double u;     // |v|
  double gfac;  // sqrt(1 + |v|^2/c^2) = 1 + e/c^2
  double arg;   // argument of G, A cos^2(theta)
};

Kinematics kinematics(const ModelParams& params, double abs_mu, double abs_psi, double theta) {
  const double s = std::sin(theta);
  const double co = std::cos(theta);
  const double amp = abs_psi / abs_mu;
  Kinematics k;
  k.e = abs_psi * s * s;
  const double inv_c2 = params.is_classical() ? 0.0 : 1.0 / (params.c * params.c);
  k.gfac = 1.0 + k.e * inv_c2;
  k.u = std::sqrt(abs_psi) * s * std::sqrt(2.0 + k.e * inv_c2);
  k.base = 4.0 * kPi * abs_mu * k.gfac * k.u * 2.0 * amp * s * co;
  k.arg = amp * co * co;
  return k;
}

}  // namespace

MomentEvaluator::MomentEvaluator(const CasimirSpec& spec, const ModelParams& params, double mu, double tol)
    : spec_(&spec), params_(params), mu_(mu), tol_(tol) {
  if (!(mu < 0.0)) throw DomainError("multiplier mu must be negative");
}

double MomentEvaluator::density(double psi) const {
  if (!(psi < 0.0)) return 0.0;
  const double abs_mu = -mu_, abs_psi = -psi;
  auto integrand = [&](double theta) {
    const Kinematics k = kinematics(params_, abs_mu, abs_psi, theta);
    return k.base * spec_->eval_g_inv(k.arg);
  };
  return quad::adaptive(integrand, 0.0, 0.5 * kPi, tol_);
}

std::pair<double, double> MomentEvaluator::density_and_casimir(double psi) const {
  if (!(psi < 0.0)) return {0.0, 0.0};
  const double abs_mu = -mu_, abs_psi = -psi;
  const double g_max = spec_->eval_g_inv(abs_psi / abs_mu);
  if (!(g_max > 0.0)) return {0.0, 0.0};
  const double casimir_scale = spec_->eval_j(g_max) / g_max;
  auto integrand = [&](double theta) {
    const Kinematics k = kinematics(params_, abs_mu, abs_psi, theta);
    const double g = spec_->eval_g_inv(k.arg);
    Vec<2> out;
    out.v[0] = k.base * g;
    out.v[1] = g > 0.0 ? k.base * spec_->eval_j(g) / casimir_scale : 0.0;
    return out;
  };
  const Vec<2> r = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 0.5 * kPi, 18, tol_);
  return {r.v[0], r.v[1] * casimir_scale};
}

VelocityMoments MomentEvaluator::all(double psi) const {
  VelocityMoments m;
  if (!(psi < 0.0)) return m;
  const double abs_mu = -mu_, abs_psi = -psi;
  const double amp = abs_psi / abs_mu;
  const double g_max = spec_->eval_g_inv(amp);
  if (!(g_max > 0.0)) return m;
  const double inv_c2 = params_.is_classical() ? 0.0 : 1.0 / (params_.c * params_.c);
  const double u_max = std::sqrt(abs_psi * (2.0 + abs_psi * inv_c2));
  const std::array<double, 7> scale = {1.0,    spec_->eval_j(g_max) / g_max, amp,  abs_psi,
                                       u_max * u_max, abs_psi,                     u_max};
  auto integrand = [&](double theta) {
    const Kinematics k = kinematics(params_, abs_mu, abs_psi, theta);
    const double g = spec_->eval_g_inv(k.arg);
    Vec<7> out;
    if (!(g > 0.0)) return out;
    const double bg = k.base * g;
    out.v[0] = bg;
    out.v[1] = k.base * spec_->eval_j(g) / scale[1];
    out.v[2] = bg * k.arg / scale[2];
    out.v[3] = bg * k.e / scale[3];
    out.v[4] = bg * (k.u * k.u / k.gfac) / scale[4];
    out.v[5] = bg * (k.e / k.gfac) / scale[5];
    out.v[6] = bg * k.u / scale[6];
    return out;
  };
  const Vec<7> r = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 0.5 * kPi, 18, tol_);
  m.rho = r.v[0];
  m.casimir = r.v[1] * scale[1];
  m.jprime_q = r.v[2] * scale[2];
  m.kinetic = r.v[3] * scale[3];
  m.virial = r.v[4] * scale[4];
  m.negative = r.v[5] * scale[5];
  m.speed = r.v[6] * scale[6];
  return m;
}

double density_from_potential(const CasimirSpec& spec, const ModelParams& params, double lambda, double mu,
                              double phi_val) {
  if (!(lambda < 0.0)) throw DomainError("density_from_potential: lambda must be negative");
  if (!(mu < 0.0)) throw DomainError("density_from_potential: mu must be negative");
  return MomentEvaluator(spec, params, mu).density(phi_val - lambda);
}

double ode_rhs(const CasimirSpec& spec, const ModelParams& params, double mu, double psi_val) {
  if (!(mu < 0.0)) throw DomainError("ode_rhs: mu must be negative");
  return MomentEvaluator(spec, params, mu).density(psi_val);
}

}  // namespace vg
