#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vg/kernel.hpp"
#include "vg/radial.hpp"
#include "vg/steady.hpp"

namespace vg {

struct ScalingReport {
  double parameter = 1.0;
  FunctionalReport before;
  FunctionalReport after;
  FunctionalReport predicted_after;
  PhaseDensity transformed;
  /// Largest relative gap between after and predicted_after over
  /// (m1, mj, ekin, epot).
  double max_relative_gap = 0.0;
  // alpha_rescale only
  double h_alpha = 1.0;
  bool dichotomy_ok = true;
};

enum class QuotientKind { automatic, relativistic, classical };

/// Relativistic form ||v|f| M1^{(2p-3)/(3(p-1))} Mj^{1/(3(p-1))} / |grad phi|^2,
/// or the classical form with ||v|^2 f|^{1/2} M1^{(7p-9)/(6(p-1))}.
/// automatic picks the classical form for c = inf.
double interpolation_quotient(const PhaseDensity& f, const CasimirSpec& spec, const ModelParams& params,
                              QuotientKind kind = QuotientKind::automatic);
double interpolation_quotient(const GroundState& state, QuotientKind kind = QuotientKind::automatic);

enum class TrialFamily { ground_state, ellipsoid, separable, box, gaussian };

std::string to_string(TrialFamily family);
TrialFamily trial_family_from_string(const std::string& name);

struct TrialBox {
  double r_max = 2.0;
  double u_max = 1.25;
  std::size_t n = 201;
  std::size_t m = 201;
};

/// Analytic trial shapes supported in {r <= 1, u <= 1}:
///   ellipsoid (1 - r^2 - u^2)_+^k, separable (1-r^2)_+^k1 (1-u^2)_+^k2,
///   box 1_{r<=1, u<=1}, gaussian exp(-(r^2+u^2)/(2 s^2)) truncated to the unit box.
PhaseDensity make_trial(TrialFamily family, const std::vector<double>& shape, const TrialBox& box = {});

struct KjEstimate {
  double p = 0.0;
  double best_quotient = 0.0;
  std::size_t trial_count = 0;
  std::string witness;
};

struct KjOptions {
  std::vector<TrialFamily> families{TrialFamily::ellipsoid, TrialFamily::separable, TrialFamily::box,
                                    TrialFamily::gaussian};
  /// Tabulated densities used by the ground_state family (dilates and
  /// amplitude rescales are redundant: the quotient is invariant under them).
  std::vector<PhaseDensity> ground_states;
  std::size_t budget = 120;
  TrialBox box{};
  QuotientKind kind = QuotientKind::relativistic;
};

/// Minimizes the quotient over the configured families by golden-section
/// coordinate search; the result is an upper bound for K_j.
KjEstimate estimate_kj(const CasimirSpec& spec, const ModelParams& params, const KjOptions& options = {});

struct ThresholdVerdict {
  bool classical = false;
  double s = 0.0;          // M1^{(2p-3)/(3(p-1))} Mj^{1/(3(p-1))}
  double bound = 0.0;      // 2 c K_hat
  bool below_estimate = false;
  std::string verdict;
  std::string caveat;
};

ThresholdVerdict threshold_check(double m1, double mj, const CasimirSpec& spec, const ModelParams& params,
                                 const KjEstimate& kj);

/// f~(x, v) = f(x/lam, lam v). The dilate is represented exactly on grids
/// scaled to (lam r_max, u_max/lam) unless target grids are given, in which
/// case it is resampled by interpolation.
ScalingReport dilate_transform(const PhaseDensity& f, double lam, const CasimirSpec& spec, const ModelParams& params,
                               std::optional<std::pair<RadialGrid, SpeedGrid>> target = std::nullopt);

/// f~(x, v) = alpha f(alpha^{1/3} x, v), with h(alpha, f) = |j(alpha f)|/(alpha |j(f)|).
/// With k_mode the argument is k in (0, 1] and alpha >= 1 is solved from
/// h(alpha, f) = 1/k; the report then also checks 1/k <= alpha^{p2-1}.
ScalingReport alpha_rescale(const PhaseDensity& f, double alpha, const CasimirSpec& spec, const ModelParams& params,
                            bool k_mode = false);

struct MonotonicityRow {
  double k = 1.0;
  double hc_mj = 0.0;        // I_c(M1, k Mj)
  double hc_m1 = 0.0;        // I_c(k M1, Mj)
  double bound_mj = 0.0;     // k^{1/(3(p2-1))} I_c(M1, Mj)
  double bound_m1 = 0.0;     // k^{(5p1-6)/(3(p1-1))} I_c(M1, Mj)
  double margin_mj = 0.0;    // (hc_mj - bound_mj) / |I_c(M1, Mj)|
  double margin_m1 = 0.0;
};

struct MonotonicityReport {
  double hc = 0.0;
  std::vector<MonotonicityRow> rows;
  double min_margin() const;
};

MonotonicityReport monotonicity_check(const GroundState& state, const std::vector<double>& k_grid,
                                      const SolveOptions& options = {}, double tol = 1e-8);

/// alpha^{e1} beta^{e2} + (1-alpha)^{e1} (1-beta)^{e2} with
/// e1 = (5p1-6)/(3(p1-1)), e2 = 1/(3(p2-1)); below 1 means no dichotomy gain.
double nondichotomy_sum(double alpha, double beta, double p1, double p2);

/// F(s) = (c/s) int_0^a (1 + s q/c^2) [(1 + s q/c^2)^2 - 1]^{1/2} G(a - q) dq.
double f_function(const ModelParams& params, double a, const CasimirSpec& spec, double s);
/// Closed-form second derivative of F.
double f_function_second(const ModelParams& params, double a, const CasimirSpec& spec, double s);

struct FRoots {
  std::vector<double> roots;
  double window_lo = 0.0, window_hi = 0.0;
};

/// Solutions of F(s) = F(|mu0|) within [|mu0| 1e-4, |mu0| 1e4].
FRoots f_roots(const ModelParams& params, double a, const CasimirSpec& spec, double mu0);

struct EquimeasureReport {
  double max_discrepancy = 0.0;
  std::size_t worst_level = 0;
  double sup_f = 0.0, sup_g = 0.0;
  std::vector<double> dist_f, dist_g;
};

EquimeasureReport equimeasure_compare(const PhaseDensity& f, const PhaseDensity& g, const std::vector<double>& levels);

struct LevelAsymptotic {
  double curvature = 0.0;          // phi''(0) from the profile
  double curvature_from_rho = 0.0; // rho(0)/3
  double exponent = 0.0;           // free log-log slope
  double coefficient = 0.0;        // limit of meas / (a - tau)^3
  double predicted = 0.0;          // K (|mu|/sqrt(phi''(0)))^3
  std::vector<double> gaps;        // a - tau
  std::vector<double> measures;
};

constexpr double kLevelConstant = 4.0 * kPi * kPi * kPi / 3.0;

/// meas{gamma_c(v) + phi(r) - phi(0) < |mu| (a - tau)} for each gap a - tau.
double level_measure(const GroundState& state, double gap);
/// Fits over gaps log-spaced in [1e-3, 1e-1] a unless given.
LevelAsymptotic level_asymptotic(const GroundState& state, std::vector<double> gaps = {});

struct BootstrapResult {
  std::vector<double> q;
  std::optional<std::size_t> first_above;  // first k with q_k >= 3/2
  bool boundary_hit = false;               // some q_k equals 3/2 to rounding
  double fixed_point = 0.0;                // 3(2p-1)/(2(3p-2))
};

BootstrapResult bootstrap_exponents(double p, double q0 = 1.2, std::size_t max_iter = 10000);

}  // namespace vg
