#pragma once

#include "vg/kernel.hpp"

namespace vg {

/// Velocity integrals of Q(v) = G((gamma_c(v) + psi) / mu)_+ at a fixed
/// value psi = phi - lambda of the shifted potential.
struct VelocityMoments {
  double rho = 0.0;       // int Q dv
  double casimir = 0.0;   // int j(Q) dv
  double jprime_q = 0.0;  // int j'(Q) Q dv
  double kinetic = 0.0;   // int gamma_c Q dv
  double virial = 0.0;    // int |v|^2 / sqrt(1+|v|^2/c^2) Q dv
  double negative = 0.0;  // int c^2 (1 - 1/sqrt(1+|v|^2/c^2)) Q dv
  double speed = 0.0;     // int |v| Q dv
};

/// Evaluates velocity moments by adaptive quadrature in q = gamma_c/|mu|.
/// The substitution q = A sin^2(theta), A = -psi/|mu|, absorbs both the
/// sqrt(q) behaviour of the velocity volume element at q = 0 and the
/// algebraic edge of G at q = A.
class MomentEvaluator {
 public:
  MomentEvaluator(const CasimirSpec& spec, const ModelParams& params, double mu, double tol = 1e-12);

  double density(double psi) const;
  /// (rho, int j(Q) dv)
  std::pair<double, double> density_and_casimir(double psi) const;
  VelocityMoments all(double psi) const;

  double mu() const { return mu_; }
  const CasimirSpec& spec() const { return *spec_; }
  const ModelParams& params() const { return params_; }

 private:
  const CasimirSpec* spec_;
  ModelParams params_;
  double mu_;
  double tol_;
};

/// rho = int G((gamma_c(v) + phi - lambda)/mu)_+ dv for lambda, mu < 0.
double density_from_potential(const CasimirSpec& spec, const ModelParams& params, double lambda, double mu,
                              double phi_val);

/// Right-hand side h(psi) of the radial equation Delta psi = h(psi).
double ode_rhs(const CasimirSpec& spec, const ModelParams& params, double mu, double psi_val);

}  // namespace vg
