#pragma once

#include <optional>
#include <string>

#include "vg/kernel.hpp"
#include "vg/moments.hpp"
#include "vg/radial.hpp"

namespace vg {

/// Phase-space and spatial integrals of a steady state, all over R^6 or R^3.
struct StateIntegrals {
  double m1 = 0.0;          // int Q
  double mj = 0.0;          // int j(Q)
  double jprime_q = 0.0;    // int j'(Q) Q
  double ekin = 0.0;        // int gamma_c Q
  double virial = 0.0;      // int |v|^2/sqrt(1+|v|^2/c^2) Q
  double negative = 0.0;    // int c^2 (1 - 1/sqrt(1+|v|^2/c^2)) Q
  double speed = 0.0;       // int |v| Q
  double phi_rho = 0.0;     // int phi rho dx
  double grad_energy = 0.0; // 1/2 int |grad phi|^2 dx
};

/// A radial steady state Q = G((gamma_c(v) + phi(r) - lambda)/mu)_+.
struct GroundState {
  ModelParams params;
  CasimirSpec spec;
  double lambda = 0.0;
  double mu = 0.0;
  double psi0 = 0.0;  // phi(0) - lambda
  double a = 0.0;     // (phi(0) - lambda)/mu
  double r_support = 0.0;
  double m1 = 0.0, mj = 0.0, ekin = 0.0, epot = 0.0, hc = 0.0;
  StateIntegrals integrals;
  RadialField phi;
  RadialField rho;
  PhaseDensity f;
  bool trivial = false;
  std::string route;  // "shooting" or "fixed_point"

  /// Speed bound on the support, gamma_c^{-1}(lambda - phi(0)).
  double u_bound() const;
  /// Q(r, u) evaluated from the tabulated potential.
  double q_value(double r, double u) const;
  FunctionalReport report() const;
  /// Central density rho(0).
  double rho_center() const { return rho.values.empty() ? 0.0 : rho.values.front(); }
};

struct TabulationOptions {
  std::size_t speed_nodes = 257;
  double speed_margin = 1.2;  // u_max = margin * u_bound
  double moment_tol = 1e-12;
};

/// Shoots (r^2 psi')' = r^2 h(psi) from psi(0) = psi0, psi'(0) = 0 on the grid
/// until psi reaches zero; lambda follows from the exterior vacuum match.
GroundState integrate_state(const CasimirSpec& spec, const ModelParams& params, double psi0, double mu,
                            const RadialGrid& grid, const TabulationOptions& tab = {});

/// Locates the support radius with a coarse probe and returns a grid of n
/// nodes whose extent is r_support / support_fraction.
RadialGrid fitted_grid(const CasimirSpec& spec, const ModelParams& params, double psi0, double mu, std::size_t n,
                       double support_fraction = 0.25);

enum class FixedPointMethod { newton, picard };

struct FixedPointOptions {
  std::size_t max_iter = 200;
  double tol = 1e-10;  // |phi - poisson_solve(rho(phi))|_inf / |phi(0)|
  FixedPointMethod method = FixedPointMethod::newton;
  double damping = 0.5;  // Picard relaxation factor
  std::optional<RadialField> initial;
  /// Width of the default Plummer-like initial guess (fraction of r_max).
  double guess_width = 0.125;
  TabulationOptions tab{};
};

/// Solves phi = poisson_solve(rho(phi)) at fixed (lambda, mu).
GroundState fixed_point_solve(const CasimirSpec& spec, const ModelParams& params, double lambda, double mu,
                              const RadialGrid& grid, const FixedPointOptions& options = {});

/// Builds a state and its integrals from a tabulated potential at fixed
/// multipliers, using grid quadrature.
GroundState state_from_potential(const CasimirSpec& spec, const ModelParams& params, double lambda, double mu,
                                 const RadialField& phi, const TabulationOptions& tab = {});

/// Integrals recomputed from the tabulated potential: exact velocity moments
/// at each radial node, Simpson in r, and the finite-volume gradient energy.
StateIntegrals grid_integrals(const GroundState& state, double moment_tol = 1e-12);

/// |phi - poisson_solve(rho(phi))|_inf / |phi(0)|; zero for the trivial state.
double self_consistency_residual(const GroundState& state);

struct SolveTargets {
  double m1_target = 1.0;
  double mj_target = 1.0;
  double tol = 1e-8;
};

struct SolveOptions {
  std::size_t n = 4096;
  double support_fraction = 0.25;
  std::size_t search_n = 512;
  std::size_t max_iter = 60;
  TabulationOptions tab{};
  /// Starting point (psi0, mu); a coarse scan is used when absent.
  std::optional<std::pair<double, double>> start;
};

/// Finds (psi0, mu) whose state carries the prescribed masses.
GroundState solve_targets(const CasimirSpec& spec, const ModelParams& params, const SolveTargets& targets,
                          const SolveOptions& options = {});

/// [LHS - RHS] / max(|LHS|, |RHS|) of the relativistic virial identity,
/// evaluated through grid_integrals.
double virial_residual(const GroundState& state);

struct IdentityResiduals {
  double virial = 0.0;
  double mf = 0.0;          // Q-weighted Euler-Lagrange relation
  double mnablav = 0.0;     // v . grad_v Q weighted relation
  double mnablax = 0.0;     // x . grad_x Q weighted relation
  double el1 = 0.0;
  double el2 = 0.0;
  double muj = 0.0;
  double lambda = 0.0;
  double virial2 = 0.0;
  double inegatif = 0.0;    // hc = -int c^2(1 - 1/sqrt(1+|v|^2/c^2)) Q
  double potential_routes = 0.0;  // 1/2|grad phi|^2 against -1/2 int phi rho
  bool mu_negative = false;
  bool lambda_negative = false;
  bool convexity_positive = false;  // int (j'(Q)Q - j(Q)) > 0
  bool muj_sign = false;            // I_c - E_kin < 0

  double max_abs() const;
};

/// All residuals are relative and evaluated through grid_integrals, with
/// I_c taken as the state's own H_c.
IdentityResiduals multiplier_identities(const GroundState& state);

struct SupportReport {
  double r_support = 0.0;
  double u_bound = 0.0;
  double max_outside = 0.0;  // largest tabulated Q outside the predicted support
  bool potential_below_lambda = false;
  bool potential_increasing = false;  // strictly, on [0, r_support]
  bool ok = false;
};

SupportReport support_check(const GroundState& state);

}  // namespace vg
