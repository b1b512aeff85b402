#include "vg/kernel.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

namespace vg {

ModelParams ModelParams::relativistic(double c) {
  if (!(c > 0.0)) throw DomainError("light speed c must be positive");
  return ModelParams{c};
}

double kinetic_weight(const ModelParams& params, double speed) {
  if (!(speed >= 0.0)) throw DomainError("kinetic_weight: speed must be nonnegative");
  if (params.is_classical()) return 0.5 * speed * speed;
  const double x = speed / params.c;
  // c^2 (sqrt(1 + x^2) - 1) rewritten without cancellation
  return speed * speed / (std::sqrt(1.0 + x * x) + 1.0);
}

double kinetic_velocity(const ModelParams& params, double speed) {
  if (params.is_classical()) return speed;
  const double x = speed / params.c;
  return speed / std::sqrt(1.0 + x * x);
}

double kinetic_weight_inverse(const ModelParams& params, double energy) {
  if (!(energy >= 0.0)) throw DomainError("kinetic_weight_inverse: energy must be nonnegative");
  if (params.is_classical()) return std::sqrt(2.0 * energy);
  return std::sqrt(energy * (2.0 + energy / (params.c * params.c)));
}

double CasimirSpec::eval_j(double t) const {
  if (polytrope_exponent) return std::pow(t, *polytrope_exponent);
  return j(t);
}

double CasimirSpec::eval_j_prime(double t) const {
  if (polytrope_exponent) return *polytrope_exponent * std::pow(t, *polytrope_exponent - 1.0);
  return j_prime(t);
}

double CasimirSpec::eval_g_inv(double s) const {
  if (s <= 0.0) return 0.0;
  if (polytrope_exponent) {
    const double p = *polytrope_exponent;
    return std::pow(s / p, 1.0 / (p - 1.0));
  }
  return g_inv(s);
}

CasimirSpec make_polytrope(double p) {
  if (!(p > 1.5)) {
    std::ostringstream os;
    os << "polytrope exponent p = " << p << " violates p > 3/2";
    throw DomainError(os.str());
  }
  CasimirSpec spec;
  std::ostringstream name;
  name << "polytrope(p=" << p << ")";
  spec.name = name.str();
  spec.j = [p](double t) { return std::pow(t, p); };
  spec.j_prime = [p](double t) { return p * std::pow(t, p - 1.0); };
  spec.g_inv = [p](double s) { return s <= 0.0 ? 0.0 : std::pow(s / p, 1.0 / (p - 1.0)); };
  spec.p = p;
  spec.p1 = p;
  spec.p2 = p;
  spec.polytrope_exponent = p;
  return spec;
}

namespace {

struct PowerTable {
  std::vector<double> t, jp, e, jcum;  // jcum[k] = j(t[k])

  std::size_t segment(double x, const std::vector<double>& nodes) const {
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    if (it == nodes.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - nodes.begin()) - 1, e.size() - 1);
  }
  // segment k covers [t_k, t_{k+1}]; e.size() = t.size() + 1 with e[0] the
  // exponent below t_0 (shared with the first segment) and e.back() above.
  double exponent(std::size_t k) const { return e[k + 1]; }

  double j_prime(double x) const {
    if (x <= 0.0) return 0.0;
    if (x < t[0]) return jp[0] * std::pow(x / t[0], e[0]);
    const std::size_t k = std::min(segment(x, t), t.size() - 1);
    return jp[k] * std::pow(x / t[k], exponent(k));
  }
  double j(double x) const {
    if (x <= 0.0) return 0.0;
    if (x < t[0]) return jp[0] * t[0] / (e[0] + 1.0) * std::pow(x / t[0], e[0] + 1.0);
    const std::size_t k = std::min(segment(x, t), t.size() - 1);
    const double ek = exponent(k);
    return jcum[k] + jp[k] * t[k] / (ek + 1.0) * (std::pow(x / t[k], ek + 1.0) - 1.0);
  }
  double g_inv(double s) const {
    if (s <= 0.0) return 0.0;
    if (s < jp[0]) return t[0] * std::pow(s / jp[0], 1.0 / e[0]);
    const std::size_t k = std::min(segment(s, jp), t.size() - 1);
    return t[k] * std::pow(s / jp[k], 1.0 / exponent(k));
  }
};

}  // namespace

CasimirSpec make_tabulated_casimir(const std::vector<double>& t, const std::vector<double>& jp,
                                   std::optional<double> p) {
  if (t.size() < 2 || t.size() != jp.size()) throw DomainError("tabulated Casimir: need >= 2 matching (t, j') pairs");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0.0) || !(jp[k] > 0.0)) throw DomainError("tabulated Casimir: t and j' must be positive");
    if (k > 0 && !(t[k] > t[k - 1] && jp[k] > jp[k - 1]))
      throw DomainError("tabulated Casimir: t and j' must be strictly increasing");
  }
  auto tab = std::make_shared<PowerTable>();
  tab->t = t;
  tab->jp = jp;
  const std::size_t n = t.size();
  tab->e.resize(n + 1);
  for (std::size_t k = 0; k + 1 < n; ++k) tab->e[k + 1] = std::log(jp[k + 1] / jp[k]) / std::log(t[k + 1] / t[k]);
  tab->e[0] = tab->e[1];
  tab->e[n] = tab->e[n - 1];
  tab->jcum.resize(n);
  tab->jcum[0] = jp[0] * t[0] / (tab->e[0] + 1.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double ek = tab->exponent(k);
    tab->jcum[k + 1] = tab->jcum[k] + jp[k] * t[k] / (ek + 1.0) * (std::pow(t[k + 1] / t[k], ek + 1.0) - 1.0);
  }

  // t j'/j tends to e + 1 at both ends and is monotone between nodes.
  double lo = tab->e[0] + 1.0, hi = lo;
  auto visit = [&](double x) {
    const double r = x * tab->j_prime(x) / tab->j(x);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  };
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (int s = 0; s < 64; ++s) visit(t[k] * std::pow(t[k + 1] / t[k], s / 64.0));
  visit(t[n - 1]);
  lo = std::min(lo, tab->e[n] + 1.0);
  hi = std::max(hi, tab->e[n] + 1.0);

  CasimirSpec spec;
  spec.name = "tabulated(" + std::to_string(n) + " nodes)";
  spec.j = [tab](double x) { return tab->j(x); };
  spec.j_prime = [tab](double x) { return tab->j_prime(x); };
  spec.g_inv = [tab](double s) { return tab->g_inv(s); };
  spec.p1 = lo;
  spec.p2 = hi;
  spec.p = p.value_or(lo);
  if (!(spec.p > 1.5)) {
    std::ostringstream os;
    os << "tabulated Casimir: growth exponent p = " << spec.p << " violates p > 3/2";
    throw DomainError(os.str());
  }
  return spec;
}

CasimirCheck check_casimir(const CasimirSpec& spec, int samples) {
  if (samples < 2) throw DomainError("check_casimir: samples must be >= 2");
  constexpr double kLogLo = -8.0;
  constexpr double kLogHi = 8.0;
  constexpr double kRelTol = 1e-10;

  std::vector<double> t(samples);
  for (int k = 0; k < samples; ++k)
    t[k] = std::pow(10.0, kLogLo + (kLogHi - kLogLo) * k / (samples - 1));

  CasimirCheck out;
  std::vector<double> jv(samples), jpv(samples);
  for (int k = 0; k < samples; ++k) {
    jv[k] = spec.eval_j(t[k]);
    jpv[k] = spec.eval_j_prime(t[k]);
    if (!(jv[k] > 0.0)) {
      std::ostringstream os;
      os << "invalid Casimir: j(" << t[k] << ") = " << jv[k] << " is not positive";
      throw DomainError(os.str());
    }
  }

  // regularity and monotonicity
  const bool zero_ok = spec.eval_j(0.0) == 0.0 && spec.eval_j_prime(0.0) == 0.0;
  bool increasing = true;
  for (int k = 1; k < samples; ++k)
    if (!(jpv[k] > jpv[k - 1])) increasing = false;
  out.regular = zero_ok && increasing;
  if (!zero_ok) out.failures.emplace_back("j(0) and j'(0) must vanish");
  if (!increasing) out.failures.emplace_back("j' is not strictly increasing on the samples");

  // growth at the origin
  out.growth_constant = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k)
    out.growth_constant = std::min(out.growth_constant, jv[k] / std::pow(t[k], spec.p));
  out.growth = spec.p > 1.5 && out.growth_constant > 0.0;
  if (!(spec.p > 1.5)) out.failures.emplace_back("growth exponent must satisfy p > 3/2");
  if (!(out.growth_constant > 0.0)) out.failures.emplace_back("no positive constant C with j(t) >= C t^p");

  // two-sided power bounds, pointwise ratio form
  out.ratio_min = std::numeric_limits<double>::infinity();
  out.ratio_max = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double ratio = t[k] * jpv[k] / jv[k];
    out.ratio_min = std::min(out.ratio_min, ratio);
    out.ratio_max = std::max(out.ratio_max, ratio);
  }
  const bool exponents_ok = spec.p1 > 1.5 && spec.p2 > 1.5 && spec.p1 <= spec.p2;
  const bool ratio_ok = out.ratio_min >= spec.p1 * (1.0 - kRelTol) &&
                        out.ratio_max <= spec.p2 * (1.0 + kRelTol) && out.ratio_min > 1.5;

  // two-sided power bounds, dichotomy form b^p1 j(t) <= j(bt) <= b^p2 j(t) for b >= 1
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    for (int l = k; l < samples; ++l) {
      const double b = t[l] / t[k];
      const double jbt = jv[l];
      const double lower = std::pow(b, spec.p1) * jv[k];
      const double upper = std::pow(b, spec.p2) * jv[k];
      worst = std::max(worst, (lower - jbt) / jbt);
      worst = std::max(worst, (jbt - upper) / jbt);
    }
  }
  out.dichotomy_max_violation = worst;
  const bool dichotomy_ok = worst <= 1e-9;
  out.two_sided = exponents_ok && ratio_ok && dichotomy_ok;
  if (!exponents_ok) out.failures.emplace_back("exponents must satisfy 3/2 < p1 <= p2");
  if (!ratio_ok) out.failures.emplace_back("t j'(t)/j(t) leaves [p1, p2] or drops below 3/2");
  if (!dichotomy_ok) out.failures.emplace_back("dichotomy inequality violated");

  // G = (j')^{-1}
  out.inverse_max_error = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double back = spec.eval_g_inv(jpv[k]);
    out.inverse_max_error = std::max(out.inverse_max_error, std::abs(back - t[k]) / t[k]);
  }
  out.inverse_ok = out.inverse_max_error <= 1e-8;
  if (!out.inverse_ok) out.failures.emplace_back("g_inv is not the inverse of j'");
  return out;
}

FunctionalReport FunctionalReport::from_parts(double m1, double mj, double ekin, double epot) {
  FunctionalReport r;
  r.m1 = m1;
  r.mj = mj;
  r.ekin = ekin;
  r.epot = epot;
  r.hc = ekin - epot;
  r.ej_norm = m1 + mj + ekin;
  return r;
}

}  // namespace vg
