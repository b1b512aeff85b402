#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vg/dynamics.hpp"
#include "vg/steady.hpp"

namespace vg {

struct DynamicsOptions {
  std::size_t n = 100000;
  double t_end_dyn = 10.0;     // in dynamical times 1/sqrt(rho(0))
  double dt_fraction = 0.01;   // dt / dynamical time
  std::uint64_t seed = 1;
  std::size_t diag_every = 10;
  std::size_t bins = 16;       // equal-mass bins of the rho distance
  std::optional<double> softening;    // default r_support / sqrt(n)
  std::optional<double> shell_width;  // default 1% of r_support
};

/// amplitude: f0 = (1+delta) Q (weights and f scaled);
/// dilation: f0 = Q(x/(1+delta), (1+delta) v) (measure preserving);
/// velocity_kick: v -> (1+delta) v with weights and f kept.
enum class PerturbationKind { amplitude, dilation, velocity_kick };

std::string to_string(PerturbationKind kind);
PerturbationKind perturbation_from_string(const std::string& name);

ParticleEnsemble perturb(ParticleEnsemble ens, PerturbationKind kind, double delta);

struct ConservationReport {
  std::size_t n = 0;
  double dt = 0.0;
  double t_end = 0.0;
  double t_dyn = 0.0;
  double hc_drift = 0.0;  // max_t |hc(t) - hc(0)| / |hc(0)|
  double m1_drift = 0.0;  // max_t |m1(t) - m1(0)|
  bool f_identical = false;
  double virial_initial = 0.0;
  double virial_max = 0.0;
  std::vector<DiagnosticsRecord> records;
};

/// Evolves a sample of the state under smooth-shell self-gravity.
ConservationReport conservation_run(const GroundState& state, const DynamicsOptions& options);

struct StabilityRun {
  double delta = 0.0;
  double max_dist_rho = 0.0;
  double prior_window_max = 0.0;  // third quarter of the run
  double final_window_max = 0.0;  // last quarter
  double max_hc_gap = 0.0;      // |hc(t) - hc(sample of Q)| / |hc(sample of Q)|
  double max_abs_virial = 0.0;
  double hc_drift = 0.0;
  std::vector<DiagnosticsRecord> records;
};

struct StabilityReport {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double dt = 0.0;
  double t_end = 0.0;
  double t_dyn = 0.0;
  PerturbationKind kind = PerturbationKind::amplitude;
  double noise_floor = 0.0;
  StabilityRun baseline;  // delta = 0
  std::vector<StabilityRun> runs;
  bool at_noise_floor = false;  // baseline max distance <= 3 noise floors
  bool monotone = false;        // max distance increasing along the ladder
  /// Saturation, every run: final_window_max <= 1.1 prior_window_max + noise floor.
  bool no_growth = false;
  std::string verdict;
  std::string metric_note;
};

/// Runs delta = 0 and the ladder from one sample (common random numbers).
/// Distances are taken against the binned density of the unperturbed sample.
StabilityReport stability_experiment(const GroundState& state, std::vector<double> deltas, PerturbationKind kind,
                                     const DynamicsOptions& options);

/// Q(sigma x, v / sigma^2): for a classical steady state this is again a
/// classical steady state, with masses multiplied by sigma^3 and speeds by
/// sigma^2. Represented exactly on rescaled grids.
PhaseDensity blowup_datum(const GroundState& classical_state, double sigma);

struct BlowupOptions {
  std::size_t n = 20000;
  double t_end_dyn = 10.0;
  double dt_fraction = 0.002;
  std::uint64_t seed = 1;
  std::size_t diag_every = 5;
  double growth = 100.0;        // concentration factor of rho_center
  double guard_fraction = 1.0;  // guard radius in units of the softening
  std::optional<double> softening;
};

struct BlowupReport {
  ModelParams params;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double hc0 = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  double t_dyn = 0.0;
  double rho_center0 = 0.0;
  double max_rho_ratio = 0.0;
  std::optional<double> t_concentration;
  bool halted_by_guard = false;
  double t_final = 0.0;
  double ekin_growth = 0.0;  // max ekin / initial ekin
  double hc_drift = 0.0;     // until the run stops
  std::string verdict;       // "concentrating" or "not concentrating"
  std::vector<DiagnosticsRecord> records;
};

/// Evolves a sample of `initial` under thin-shell self-gravity until
/// rho_center exceeds growth times its initial value, the resolution guard
/// trips, or t_end. Requires hc(initial) < 0 for the given model.
BlowupReport blowup_experiment(const CasimirSpec& spec, const ModelParams& params, const PhaseDensity& initial,
                               const BlowupOptions& options);

}  // namespace vg
