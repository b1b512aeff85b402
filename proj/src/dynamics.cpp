#include "vg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "vg/parallel.hpp"

namespace vg {

namespace {

constexpr std::size_t kChunk = 8192;

// Elementwise loop split into chunks for parallel_for.
template <class F>
void for_chunks(std::size_t n, F&& body) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) body(i);
  });
}

double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vec3 direction(const CounterRng& rng, std::uint64_t counter) {
  const double z = 2.0 * rng.uniform(counter) - 1.0;
  const double az = 2.0 * kPi * rng.uniform(counter + 1);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(az), s * std::sin(az), z};
}

// Drift velocity dgamma_c/dv.
Vec3 drift_velocity(const ModelParams& params, const Vec3& v) {
  if (params.is_classical()) return v;
  const double u = norm(v);
  const double s = 1.0 / std::sqrt(1.0 + u * u / (params.c * params.c));
  return {v[0] * s, v[1] * s, v[2] * s};
}

template <class Q>
ParticleEnsemble rejection_sample(Q&& q, double r_max, double u_max, double q_max, double mass,
                                  const ModelParams& params, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sampling: n must be positive");
  if (!(q_max > 0.0) || !(mass > 0.0)) throw DomainError("sampling: degenerate density (Q = 0)");
  ParticleEnsemble ens;
  ens.params = params;
  ens.seed = seed;
  ens.x.resize(n);
  ens.v.resize(n);
  ens.w.assign(n, mass / static_cast<double>(n));
  ens.f.resize(n);
  const CounterRng rng(seed);
  std::uint64_t counter = 0;
  const std::uint64_t max_draws = 100000ULL * n + 1000000ULL;
  for (std::size_t k = 0; k < n;) {
    if (counter > 7 * max_draws) throw NumericalError("sampling: acceptance rate too low");
    // r^3 and u^3 uniform gives the r^2 u^2 factor; accept with Q / Q_max.
    const double r = r_max * std::cbrt(rng.uniform(counter));
    const double u = u_max * std::cbrt(rng.uniform(counter + 1));
    const double val = q(r, u);
    const bool accept = rng.uniform(counter + 2) * q_max < val;
    counter += 3;
    if (!accept) continue;
    const Vec3 dx = direction(rng, counter), dv = direction(rng, counter + 2);
    counter += 4;
    ens.x[k] = {r * dx[0], r * dx[1], r * dx[2]};
    ens.v[k] = {u * dv[0], u * dv[1], u * dv[2]};
    ens.f[k] = val;
    ++k;
  }
  double partial = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) partial += ens.w[k];
  ens.w.back() = mass - partial;
  return ens;
}

// Orders indices by (radius, index); insertion sort profits from the
// previous order, which is nearly sorted between steps.
void sort_by_radius(std::vector<std::uint32_t>& order, const std::vector<double>& r) {
  auto less = [&](std::uint32_t a, std::uint32_t b) { return r[a] < r[b] || (r[a] == r[b] && a < b); };
  if (order.size() != r.size()) {
    order.resize(r.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), less);
    return;
  }
  std::size_t moves = 0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const std::uint32_t key = order[i];
    std::size_t j = i;
    while (j > 0 && less(key, order[j - 1])) {
      order[j] = order[j - 1];
      --j;
      if (++moves > 64 * order.size()) {
        order[j] = key;
        std::sort(order.begin(), order.end(), less);
        return;
      }
    }
    order[j] = key;
  }
}

// Half-self-weight forces and the matching softened energy.
double self_gravity(const ParticleEnsemble& ens, const std::vector<std::uint32_t>& order,
                    const std::vector<double>& r, double eps, std::vector<Vec3>& accel) {
  const std::size_t n = ens.size();
  accel.resize(n);
  double inside = 0.0, epot = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint32_t i = order[k];
    const double m_half = inside + 0.5 * ens.w[i];
    const double ri = r[i];
    const double mag = ri > 0.0 ? m_half / (4.0 * kPi * (ri * ri + eps * eps)) / ri : 0.0;
    accel[i] = {-mag * ens.x[i][0], -mag * ens.x[i][1], -mag * ens.x[i][2]};
    inside += ens.w[i];
    const double g_next = k + 1 < n ? softened_tail(r[order[k + 1]], eps) : 0.0;
    epot += inside * inside / (8.0 * kPi) * (softened_tail(ri, eps) - g_next);
  }
  return epot;
}

// Cubic B-spline on [-2, 2] and its primitive.
double bspline(double x) {
  const double a = std::abs(x);
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) return (2.0 - a) * (2.0 - a) * (2.0 - a) / 6.0;
  return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
}

double bspline_step(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  if (x > 0.0) return 1.0 - bspline_step(-x);
  if (x <= -1.0) return std::pow(2.0 + x, 4) / 24.0;
  return 0.5 + 2.0 * x / 3.0 - x * x * x / 3.0 - x * x * x * x / 8.0;
}

// Smooth-shell energy on the mesh r_g = g * width and its gradient.
double smooth_gravity(const ParticleEnsemble& ens, double eps, double width, std::vector<Vec3>& accel) {
  const std::size_t n = ens.size();
  std::vector<double> x(n);
  double x_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) x_max = std::max(x_max, x[i] = norm(ens.x[i]) / width);
  if (!(x_max < 1e7)) throw NumericalError("self gravity: particle beyond the shell mesh capacity");
  const std::size_t nodes = static_cast<std::size_t>(x_max) + 4;

  // M_g = sum_i w_i (S(g - x_i) + S(g + x_i) - 1); full steps enter through
  // a difference array.
  std::vector<double> mass(nodes, 0.0), step(nodes + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i], wi = ens.w[i];
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(xi - 2.0));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(xi + 2.0));
    for (std::ptrdiff_t g = std::max<std::ptrdiff_t>(lo, 0); g <= hi; ++g) mass[g] += wi * bspline_step(g - xi);
    step[static_cast<std::size_t>(hi + 1)] += wi;
    for (std::ptrdiff_t g = 0; g < 2.0 - xi; ++g) mass[g] += wi * (bspline_step(g + xi) - 1.0);
  }
  double run = 0.0;
  for (std::size_t g = 0; g < nodes; ++g) mass[g] += (run += step[g]);
  mass[0] = 0.0;  // odd in r by the mirror term

  // Cell integrals of 1/(8 pi (r^2 + eps^2)); the last cell extends to infinity.
  std::vector<double> coef(nodes);
  double epot = 0.0;
  for (std::size_t g = 0; g < nodes; ++g) {
    const double a = g == 0 ? 0.0 : (g - 0.5) * width;
    const double upper = g + 1 == nodes ? 0.0 : softened_tail((g + 0.5) * width, eps);
    coef[g] = g == 0 && eps == 0.0 ? 0.0 : (softened_tail(a, eps) - upper) / (8.0 * kPi);
    if (mass[g] != 0.0) epot += coef[g] * mass[g] * mass[g];
  }

  accel.resize(n);
  for_chunks(n, [&](std::size_t i) {
    const double xi = x[i];
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(xi - 2.0));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(xi + 2.0));
    double dudr = 0.0;  // (1/w_i) dU/dr_i
    for (std::ptrdiff_t g = std::max<std::ptrdiff_t>(lo, 0); g <= hi; ++g)
      dudr -= 2.0 * coef[g] * mass[g] * bspline(g - xi);
    for (std::ptrdiff_t g = 0; g < 2.0 - xi; ++g) dudr += 2.0 * coef[g] * mass[g] * bspline(g + xi);
    dudr /= width;
    const double r = xi * width;
    const double s = r > 0.0 ? dudr / r : 0.0;
    accel[i] = {s * ens.x[i][0], s * ens.x[i][1], s * ens.x[i][2]};
  });
  return epot;
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix(splitmix(seed_ ^ splitmix(stream_)) + counter);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

double ParticleEnsemble::total_weight() const {
  double s = 0.0;
  for (double x : w) s += x;
  return s;
}

ParticleEnsemble sample_state(const GroundState& st, std::size_t n, std::uint64_t seed) {
  if (st.trivial) throw DomainError("sample_state: degenerate state (Q = 0)");
  const double q_max = st.spec.eval_g_inv(st.a);
  return rejection_sample([&](double r, double u) { return st.q_value(r, u); }, st.r_support, st.u_bound(), q_max,
                          st.m1, st.params, n, seed);
}

ParticleEnsemble sample_density(const PhaseDensity& f, const ModelParams& params, std::size_t n, std::uint64_t seed) {
  const auto w = phase_weights(f.grid_r(), f.grid_u());
  double mass = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) mass += w[k] * f.values()[k];
  const double r_max = std::min(f.grid_r().max, f.support_radius() + f.grid_r().h());
  const double u_max = std::min(f.grid_u().max, f.support_speed() + f.grid_u().h());
  return rejection_sample([&](double r, double u) { return f.interpolate_linear(r, u); }, r_max, u_max, f.sup(), mass,
                          params, n, seed);
}

double default_softening(double r_support, std::size_t n) {
  if (n == 0) throw DomainError("default_softening: n must be positive");
  return r_support / std::sqrt(static_cast<double>(n));
}

double default_shell_width(double r_support) { return 0.01 * r_support; }

double softened_tail(double r, double eps) {
  if (eps == 0.0) return 1.0 / r;
  return std::atan2(eps, r) / eps;
}

ParticleField field_from_particles(const ParticleEnsemble& ens, const RadialGrid& grid, double eps) {
  if (eps < 0.0) throw DomainError("field_from_particles: softening must be nonnegative");
  const std::size_t n = ens.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = norm(ens.x[i]);
  std::vector<std::uint32_t> order;
  sort_by_radius(order, r);

  ParticleField out;
  out.epot = self_gravity(ens, order, r, eps, out.accel);

  // suffix[k] = sum_{j >= k} w g(r) over sorted particles
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + ens.w[order[k]] * softened_tail(r[order[k]], eps);
  out.phi = RadialField::zeros(grid);
  out.dphi = RadialField::zeros(grid);
  double inside = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double rn = grid.node(i);
    while (k < n && r[order[k]] < rn) inside += ens.w[order[k++]];
    const double s2 = rn * rn + eps * eps;
    out.dphi.values[i] = inside > 0.0 ? inside / (4.0 * kPi * s2) : 0.0;
    const double own = inside > 0.0 ? inside * softened_tail(rn, eps) : 0.0;
    out.phi.values[i] = -(own + suffix[k]) / (4.0 * kPi);
  }
  return out;
}

FrozenField FrozenField::from(const ParticleEnsemble& ens, double eps) {
  const std::size_t n = ens.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = norm(ens.x[i]);
  std::vector<std::uint32_t> order;
  sort_by_radius(order, r);
  FrozenField fz;
  fz.softening = eps;
  fz.radii.resize(n);
  fz.inner.assign(n + 1, 0.0);
  fz.tail.assign(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    fz.radii[k] = r[order[k]];
    fz.inner[k + 1] = fz.inner[k] + ens.w[order[k]];
  }
  for (std::size_t k = n; k-- > 0;) fz.tail[k] = fz.tail[k + 1] + ens.w[order[k]] * softened_tail(fz.radii[k], eps);
  return fz;
}

double FrozenField::enclosed(double r) const {
  const auto k = static_cast<std::size_t>(std::lower_bound(radii.begin(), radii.end(), r) - radii.begin());
  return inner[k];
}

double FrozenField::potential(double r) const {
  const auto k = static_cast<std::size_t>(std::lower_bound(radii.begin(), radii.end(), r) - radii.begin());
  const double own = inner[k] > 0.0 ? inner[k] * softened_tail(r, softening) : 0.0;
  return -(own + tail[k]) / (4.0 * kPi);
}

Leapfrog::Leapfrog(AccelerationModel model) : model_(std::move(model)) {}

void Leapfrog::refresh(const ParticleEnsemble& ens) {
  const std::size_t n = ens.size();
  accel_.resize(n);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SelfGravity>) {
          if (m.shell_width > 0.0) {
            epot_ = smooth_gravity(ens, m.softening, m.shell_width, accel_);
            return;
          }
          radius_.resize(n);
          for_chunks(n, [&](std::size_t i) { radius_[i] = norm(ens.x[i]); });
          sort_by_radius(order_, radius_);
          epot_ = self_gravity(ens, order_, radius_, m.softening, accel_);
        } else if constexpr (std::is_same_v<M, PointMass>) {
          for_chunks(n, [&](std::size_t i) {
            const double r = norm(ens.x[i]);
            const double mag = m.mass / (4.0 * kPi * r * r * r);
            accel_[i] = {-mag * ens.x[i][0], -mag * ens.x[i][1], -mag * ens.x[i][2]};
          });
          epot_ = 0.0;
          for (std::size_t i = 0; i < n; ++i) epot_ += ens.w[i] * m.mass / (4.0 * kPi * norm(ens.x[i]));
        } else if constexpr (std::is_same_v<M, ZeroField>) {
          std::fill(accel_.begin(), accel_.end(), Vec3{0.0, 0.0, 0.0});
          epot_ = 0.0;
        } else {
          for_chunks(n, [&](std::size_t i) {
            const double r = norm(ens.x[i]);
            const double mag = r > 0.0 ? m.enclosed(r) / (4.0 * kPi * (r * r + m.softening * m.softening)) / r : 0.0;
            accel_[i] = {-mag * ens.x[i][0], -mag * ens.x[i][1], -mag * ens.x[i][2]};
          });
          epot_ = 0.0;
          for (std::size_t i = 0; i < n; ++i) epot_ -= ens.w[i] * m.potential(norm(ens.x[i]));
        }
      },
      model_);
  valid_ = true;
}

const std::vector<Vec3>& Leapfrog::accelerations(const ParticleEnsemble& ens) {
  if (!valid_ || accel_.size() != ens.size()) refresh(ens);
  return accel_;
}

double Leapfrog::potential_energy(const ParticleEnsemble& ens) {
  accelerations(ens);
  return epot_;
}

void Leapfrog::step(ParticleEnsemble& ens, double dt) {
  if (!(dt > 0.0) && !(dt < 0.0)) throw DomainError("push: dt must be nonzero");
  accelerations(ens);
  const std::size_t n = ens.size();
  const double half = 0.5 * dt;
  const ModelParams params = ens.params;
  auto kick = [&] {
    for_chunks(n, [&](std::size_t i) {
      for (int d = 0; d < 3; ++d) ens.v[i][d] += half * accel_[i][d];
    });
  };
  kick();
  std::vector<char> bad(n, 0);
  for_chunks(n, [&](std::size_t i) {
    const Vec3 xdot = drift_velocity(params, ens.v[i]);
    if (!params.is_classical() && !(norm(xdot) < params.c)) bad[i] = 1;
    for (int d = 0; d < 3; ++d) ens.x[i][d] += dt * xdot[d];
  });
  refresh(ens);
  kick();
  ++steps_;
  for (std::size_t i = 0; i < n; ++i) {
    const bool finite = std::isfinite(ens.x[i][0] + ens.x[i][1] + ens.x[i][2] + ens.v[i][0] + ens.v[i][1] + ens.v[i][2]);
    if (finite && !bad[i]) continue;
    if (dump_path) write_snapshot(ens, *dump_path);
    char msg[200];
    std::snprintf(msg, sizeof msg, "push: %s at particle %zu after step %zu%s",
                  finite ? "transport speed reached c" : "non-finite state", i, steps_,
                  dump_path ? " (snapshot written)" : "");
    throw NumericalError(msg);
  }
}

void push(ParticleEnsemble& ens, double dt, const AccelerationModel& model) {
  if (!(dt > 0.0)) throw DomainError("push: dt must be positive");
  Leapfrog lf(model);
  lf.step(ens, dt);
}

RhoReference reference_from_state(const GroundState& st, std::size_t bins) {
  if (st.trivial) throw DomainError("reference_from_state: degenerate state");
  if (bins < 1) throw DomainError("reference_from_state: need at least one bin");
  const RadialGrid& g = st.rho.grid;
  std::vector<double> cum(g.n, 0.0);
  for (std::size_t i = 1; i < g.n; ++i) {
    const double r0 = g.node(i - 1), r1 = g.node(i);
    cum[i] = cum[i - 1] + 2.0 * kPi * g.h() * (r0 * r0 * st.rho.values[i - 1] + r1 * r1 * st.rho.values[i]);
  }
  const double total = cum.back();
  RhoReference ref;
  ref.edges.push_back(0.0);
  std::size_t i = 1;
  for (std::size_t b = 1; b < bins; ++b) {
    const double target = total * static_cast<double>(b) / static_cast<double>(bins);
    while (cum[i] < target) ++i;
    const double t = (target - cum[i - 1]) / (cum[i] - cum[i - 1]);
    ref.edges.push_back(g.node(i - 1) + t * g.h());
  }
  ref.edges.push_back(std::numeric_limits<double>::infinity());
  ref.masses.assign(bins, st.m1 / static_cast<double>(bins));
  return ref;
}

RhoReference reference_from_ensemble(const ParticleEnsemble& ens, std::size_t bins) {
  const std::size_t n = ens.size();
  if (bins < 1 || bins > n) throw DomainError("reference_from_ensemble: bins must lie in [1, n]");
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = norm(ens.x[i]);
  std::vector<std::uint32_t> order;
  sort_by_radius(order, r);
  RhoReference ref;
  ref.edges.push_back(0.0);
  for (std::size_t b = 1; b < bins; ++b) {
    const std::size_t k = b * n / bins;
    ref.edges.push_back(0.5 * (r[order[k - 1]] + r[order[k]]));
  }
  ref.edges.push_back(std::numeric_limits<double>::infinity());
  ref.masses.assign(bins, 0.0);
  for (std::size_t b = 0, k = 0; b < bins; ++b)
    for (const std::size_t end = (b + 1) * n / bins; k < end; ++k) ref.masses[b] += ens.w[order[k]];
  return ref;
}

double rho_distance(const ParticleEnsemble& ens, const RhoReference& ref) {
  const std::size_t bins = ref.masses.size();
  std::vector<double> m(bins, 0.0);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const double r = norm(ens.x[i]);
    auto it = std::upper_bound(ref.edges.begin() + 1, ref.edges.end() - 1, r);
    m[static_cast<std::size_t>(it - ref.edges.begin()) - 1] += ens.w[i];
  }
  double d = 0.0, total = 0.0;
  for (std::size_t b = 0; b < bins; ++b) d += std::abs(m[b] - ref.masses[b]), total += ref.masses[b];
  return d / total;
}

double rho_noise_floor(const RhoReference& ref, std::size_t n) {
  double total = 0.0, s = 0.0;
  for (double m : ref.masses) total += m;
  for (double m : ref.masses) {
    const double p = m / total;
    s += std::sqrt(2.0 / kPi) * std::sqrt(2.0 * p * (1.0 - p) / static_cast<double>(n));
  }
  return s;
}

double rho_center_estimate(const ParticleEnsemble& ens, std::size_t k) {
  const std::size_t n = ens.size();
  if (k == 0) k = std::max<std::size_t>(32, n / 1000);
  if (k < 2 || k > n) throw DomainError("rho_center_estimate: k must lie in [2, n]");
  std::vector<std::pair<double, double>> rw(n);
  for (std::size_t i = 0; i < n; ++i) rw[i] = {norm(ens.x[i]), ens.w[i]};
  std::nth_element(rw.begin(), rw.begin() + static_cast<std::ptrdiff_t>(k - 1), rw.end());
  const double rk = rw[k - 1].first;
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) mass += rw[i].second;
  return mass / (4.0 * kPi / 3.0 * rk * rk * rk);
}

DiagnosticsRecord diagnose(const ParticleEnsemble& ens, double t, Leapfrog& integrator, const EvolveOptions& opt) {
  const auto& accel = integrator.accelerations(ens);
  DiagnosticsRecord d;
  d.t = t;
  d.m1 = ens.total_weight();
  double vxdot = 0.0, xa = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    d.ekin += ens.w[i] * kinetic_weight(ens.params, norm(ens.v[i]));
    vxdot += ens.w[i] * dot(ens.v[i], drift_velocity(ens.params, ens.v[i]));
    xa += ens.w[i] * dot(ens.x[i], accel[i]);
  }
  d.epot = integrator.potential_energy(ens);
  d.hc = d.ekin - d.epot;
  d.virial = vxdot > 0.0 ? (vxdot + xa) / vxdot : 0.0;
  d.rho_center = rho_center_estimate(ens, opt.center_count);
  if (opt.spec) {
    for (std::size_t i = 0; i < ens.size(); ++i)
      if (ens.f[i] > 0.0) d.mj_estimate += ens.w[i] * opt.spec->eval_j(ens.f[i]) / ens.f[i];
  }
  for (double q : opt.lq) {
    double s = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i)
      if (ens.f[i] > 0.0) s += ens.w[i] * std::pow(ens.f[i], q - 1.0);
    d.lq_norms.push_back(s);
  }
  if (opt.reference) d.dist_rho = rho_distance(ens, *opt.reference);
  return d;
}

EvolveResult evolve(ParticleEnsemble& ens, double t_end, double dt, const AccelerationModel& model,
                    const EvolveOptions& opt) {
  if (!(dt > 0.0)) throw DomainError("evolve: dt must be positive");
  if (!(t_end >= 0.0)) throw DomainError("evolve: t_end must be nonnegative");
  if (opt.diag_every == 0) throw DomainError("evolve: diag_every must be positive");
  const std::size_t k = opt.center_count == 0 ? std::max<std::size_t>(32, ens.size() / 1000) : opt.center_count;
  Leapfrog lf(model);
  lf.dump_path = opt.dump_path;
  EvolveResult res;
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  res.records.push_back(diagnose(ens, 0.0, lf, opt));
  auto guard_tripped = [&] {
    if (!opt.guard_radius) return false;
    std::vector<double> r(ens.size());
    for (std::size_t i = 0; i < ens.size(); ++i) r[i] = norm(ens.x[i]);
    std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k - 1), r.end());
    return r[k - 1] < *opt.guard_radius;
  };
  for (std::size_t s = 1; s <= steps; ++s) {
    lf.step(ens, dt);
    res.steps = s;
    res.t_final = static_cast<double>(s) * dt;
    const bool stop = guard_tripped();
    if (s % opt.diag_every == 0 || s == steps || stop) res.records.push_back(diagnose(ens, res.t_final, lf, opt));
    if (stop) {
      res.halted_by_guard = true;
      break;
    }
  }
  return res;
}

void write_snapshot(const ParticleEnsemble& ens, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("write_snapshot: cannot open " + path.string());
  out << "x,y,z,vx,vy,vz,w,f\n";
  char buf[512];
  for (std::size_t i = 0; i < ens.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", ens.x[i][0], ens.x[i][1],
                  ens.x[i][2], ens.v[i][0], ens.v[i][1], ens.v[i][2], ens.w[i], ens.f[i]);
    out << buf;
  }
}

}  // namespace vg
