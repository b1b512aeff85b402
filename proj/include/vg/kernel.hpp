#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vg {

/// Raised when an input violates a documented precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its postcondition
/// (divergence, unreachable targets, support leaving the grid, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

/// Light speed of the model. An infinite value selects the classical
/// (Newtonian kinetic energy) system through separate exact formulas.
struct ModelParams {
  double c = std::numeric_limits<double>::infinity();

  static ModelParams classical() { return {}; }
  static ModelParams relativistic(double c);

  bool is_classical() const { return std::isinf(c); }
};

/// gamma_c(u) = c^2 (sqrt(1 + u^2/c^2) - 1), or u^2/2 for the classical model.
double kinetic_weight(const ModelParams& params, double speed);

/// Derivative d gamma_c / du = u / sqrt(1 + u^2/c^2) (transport velocity).
double kinetic_velocity(const ModelParams& params, double speed);

/// Inverse of kinetic_weight on [0, inf).
double kinetic_weight_inverse(const ModelParams& params, double energy);

/// A convex Casimir function j together with j' and G = (j')^{-1}.
/// p is the growth exponent with j(t) >= C t^p, and p1 <= t j'(t)/j(t) <= p2.
struct CasimirSpec {
  std::string name;
  std::function<double(double)> j;
  std::function<double(double)> j_prime;
  std::function<double(double)> g_inv;
  double p = 2.0;
  double p1 = 2.0;
  double p2 = 2.0;
  /// Set for j(t) = t^p; enables closed-form evaluation on hot paths.
  std::optional<double> polytrope_exponent;

  double eval_j(double t) const;
  double eval_j_prime(double t) const;
  double eval_g_inv(double s) const;
};

/// j(t) = t^p, p > 3/2.
CasimirSpec make_polytrope(double p);

/// j' interpolated log-log linearly through (t_k, j'_k) and extended by the
/// end exponents; j is its exact integral from 0 and g_inv its exact inverse.
/// p1, p2 bound t j'/j over the whole half line; p defaults to p1.
CasimirSpec make_tabulated_casimir(const std::vector<double>& t, const std::vector<double>& j_prime,
                                   std::optional<double> p = std::nullopt);

struct CasimirCheck {
  bool regular = false;    // j(0) = j'(0) = 0, j' strictly increasing on the samples
  bool growth = false;     // p > 3/2 and j(t) >= C t^p with C > 0
  bool two_sided = false;  // p1 <= t j'/j <= p2 and the equivalent dichotomy form
  bool inverse_ok = false;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double growth_constant = 0.0;
  double inverse_max_error = 0.0;
  double dichotomy_max_violation = 0.0;
  std::vector<std::string> failures;

  bool passed() const { return regular && growth && two_sided && inverse_ok; }
};

/// Samples the Casimir on a logarithmic grid spanning [1e-8, 1e8].
CasimirCheck check_casimir(const CasimirSpec& spec, int samples);

/// Integral functionals of a phase-space density.
struct FunctionalReport {
  double m1 = 0.0;
  double mj = 0.0;
  double ekin = 0.0;
  double epot = 0.0;
  double hc = 0.0;
  double ej_norm = 0.0;

  static FunctionalReport from_parts(double m1, double mj, double ekin, double epot);
};

}  // namespace vg
