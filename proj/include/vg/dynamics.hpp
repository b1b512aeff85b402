#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "vg/kernel.hpp"
#include "vg/radial.hpp"
#include "vg/steady.hpp"

namespace vg {

using Vec3 = std::array<double, 3>;

/// SplitMix64 applied to (seed, stream, counter): every draw is addressable,
/// so runs are reproducible independently of evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}
  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Characteristics of the flow. Weights never change, so the total mass is
/// conserved exactly; f carries the value of the density along each path.
struct ParticleEnsemble {
  ModelParams params;
  std::vector<Vec3> x;
  std::vector<Vec3> v;
  std::vector<double> w;
  std::vector<double> f;
  std::uint64_t seed = 0;

  std::size_t size() const { return w.size(); }
  /// Sequential sum of the weights.
  double total_weight() const;
};

/// Rejection-samples (r, u) from 16 pi^2 r^2 u^2 Q(r, u) with isotropic
/// directions. Weights are equal, the last one absorbing rounding so that
/// total_weight() == state.m1 exactly.
ParticleEnsemble sample_state(const GroundState& state, std::size_t n, std::uint64_t seed);

/// Same, for a tabulated density (bilinear interpolation, total mass from the
/// grid quadrature).
ParticleEnsemble sample_density(const PhaseDensity& f, const ModelParams& params, std::size_t n, std::uint64_t seed);

/// r_support / sqrt(n).
double default_softening(double r_support, std::size_t n);

/// Default smooth shell width, 1% of the support radius.
double default_shell_width(double r_support);

/// Softened Green's tail g(r) = int_r^inf ds / (s^2 + eps^2); 1/r for eps = 0.
double softened_tail(double r, double eps);

struct ParticleField {
  RadialField phi;   // potential on the grid, zero at infinity
  RadialField dphi;  // M(<r) / (4 pi (r^2 + eps^2))
  std::vector<Vec3> accel;
  /// int M(r)^2 / (8 pi (r^2 + eps^2)) dr, the energy whose gradient is the
  /// half-self-weight force.
  double epot = 0.0;
};

/// Enclosed-mass field of the particles. Particle forces use the
/// half-self-weight convention; the grid profile counts particles strictly
/// inside each node. Particles beyond the grid are allowed.
ParticleField field_from_particles(const ParticleEnsemble& ens, const RadialGrid& grid, double softening = 0.0);

/// shell_width = 0: thin shells with the half-self-weight convention. Forces
/// then jump when shells cross, which limits leapfrog energy errors to first
/// order in dt. shell_width > 0 spreads each shell radially with a cubic
/// B-spline of that scale (mirrored at r = 0) and evaluates
/// U = sum_g M(r_g)^2 int_cell dr / (8 pi (r^2 + eps^2)) on a mesh of the
/// same spacing; forces are the exact gradient of U.
struct SelfGravity {
  double softening = 0.0;
  double shell_width = 0.0;
};

/// External point mass: a = -mass x / (4 pi |x|^3).
struct PointMass {
  double mass = 1.0;
};

struct ZeroField {};

/// Enclosed-mass profile of a fixed ensemble, held fixed in time.
struct FrozenField {
  std::vector<double> radii;  // sorted
  std::vector<double> inner;  // inner[k] = sum of weights of radii[0..k)
  std::vector<double> tail;   // tail[k] = sum_{j >= k} w_j g(radii[j])
  double softening = 0.0;

  static FrozenField from(const ParticleEnsemble& ens, double softening);
  double enclosed(double r) const;
  double potential(double r) const;
};

using AccelerationModel = std::variant<SelfGravity, PointMass, ZeroField, FrozenField>;

/// Kick-drift-kick leapfrog. Accelerations at the current positions are
/// cached between steps, so each step costs one force evaluation.
class Leapfrog {
 public:
  explicit Leapfrog(AccelerationModel model);

  void step(ParticleEnsemble& ens, double dt);
  const std::vector<Vec3>& accelerations(const ParticleEnsemble& ens);
  /// Potential energy of the model, positive for attraction.
  double potential_energy(const ParticleEnsemble& ens);
  void invalidate() { valid_ = false; }
  /// Snapshot written when a non-finite value is detected.
  std::optional<std::filesystem::path> dump_path;

 private:
  void refresh(const ParticleEnsemble& ens);

  AccelerationModel model_;
  std::vector<Vec3> accel_;
  std::vector<std::uint32_t> order_;
  std::vector<double> radius_;
  double epot_ = 0.0;
  bool valid_ = false;
  std::size_t steps_ = 0;
};

/// One leapfrog step with a fresh force evaluation.
void push(ParticleEnsemble& ens, double dt, const AccelerationModel& model);

struct DiagnosticsRecord {
  double t = 0.0;
  double hc = 0.0;
  double m1 = 0.0;
  double mj_estimate = 0.0;  // sum w j(f)/f
  double ekin = 0.0;
  double epot = 0.0;
  /// (sum w v.xdot + sum w x.a) / sum w v.xdot
  double virial = 0.0;
  double rho_center = 0.0;
  std::optional<double> dist_rho;
  /// |f|_q^q estimated as sum w f^{q-1}
  std::vector<double> lq_norms;
};

/// Equal-mass radial bins of a reference density, last edge at infinity.
struct RhoReference {
  std::vector<double> edges;
  std::vector<double> masses;
};

RhoReference reference_from_state(const GroundState& state, std::size_t bins);
/// Bins with (nearly) equal particle counts; the ensemble itself lies at
/// distance zero.
RhoReference reference_from_ensemble(const ParticleEnsemble& ens, std::size_t bins);
/// sum_b |m_b - ref_b| / sum_b ref_b.
double rho_distance(const ParticleEnsemble& ens, const RhoReference& ref);
/// Expected distance between two independent n-samples of the same density.
double rho_noise_floor(const RhoReference& ref, std::size_t n);
/// Weight of the k-1 innermost particles over the volume of the k-th radius;
/// k defaults to max(32, n/1000).
double rho_center_estimate(const ParticleEnsemble& ens, std::size_t k = 0);

struct EvolveOptions {
  std::size_t diag_every = 10;
  std::optional<CasimirSpec> spec;  // enables mj_estimate
  std::vector<double> lq;
  std::optional<RhoReference> reference;
  std::size_t center_count = 0;
  /// Stop once the center_count-th radius falls below this value.
  std::optional<double> guard_radius;
  std::optional<std::filesystem::path> dump_path;
};

struct EvolveResult {
  std::vector<DiagnosticsRecord> records;
  bool halted_by_guard = false;
  double t_final = 0.0;
  std::size_t steps = 0;
};

DiagnosticsRecord diagnose(const ParticleEnsemble& ens, double t, Leapfrog& integrator, const EvolveOptions& opt);

EvolveResult evolve(ParticleEnsemble& ens, double t_end, double dt, const AccelerationModel& model,
                    const EvolveOptions& options = {});

/// Columns x,y,z,vx,vy,vz,w,f.
void write_snapshot(const ParticleEnsemble& ens, const std::filesystem::path& path);

}  // namespace vg
