#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "vg/kernel.hpp"

namespace vg {

/// Uniform grid on [0, max] with n nodes; nodes[0] = 0, nodes[n-1] = max.
struct UniformGrid {
  double max = 1.0;
  std::size_t n = 2;

  static UniformGrid make(double max, std::size_t n);

  double h() const { return max / static_cast<double>(n - 1); }
  double node(std::size_t i) const { return static_cast<double>(i) * h(); }
  std::vector<double> nodes() const;

  friend bool operator==(const UniformGrid&, const UniformGrid&) = default;
};

using RadialGrid = UniformGrid;
using SpeedGrid = UniformGrid;

/// A scalar profile sampled on a radial grid (density, potential, ...).
struct RadialField {
  RadialGrid grid;
  std::vector<double> values;

  static RadialField zeros(const RadialGrid& grid);
  /// Cubic Lagrange interpolation; constant extension is not provided, the
  /// radius must lie inside the grid.
  double interpolate(double r) const;
};

/// Radial-isotropic phase-space density f(|x|, |v|) on a tensor grid.
/// Integrals over R^6 carry the weight 16 pi^2 r^2 u^2.
class PhaseDensity {
 public:
  PhaseDensity() = default;
  PhaseDensity(const RadialGrid& grid_r, const SpeedGrid& grid_u);

  template <class F>
  static PhaseDensity tabulate(const RadialGrid& grid_r, const SpeedGrid& grid_u, F&& f) {
    PhaseDensity d(grid_r, grid_u);
    for (std::size_t i = 0; i < grid_r.n; ++i)
      for (std::size_t j = 0; j < grid_u.n; ++j) d.at(i, j) = f(grid_r.node(i), grid_u.node(j));
    return d;
  }

  const RadialGrid& grid_r() const { return grid_r_; }
  const SpeedGrid& grid_u() const { return grid_u_; }
  double& at(std::size_t i, std::size_t j) { return values_[i * grid_u_.n + j]; }
  double at(std::size_t i, std::size_t j) const { return values_[i * grid_u_.n + j]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Throws DomainError on negative values or nonzero values on the outer
  /// edges r = r_max, u = u_max.
  void validate() const;

  double sup() const;
  /// Tensor cubic Lagrange interpolation, clamped at zero; zero outside the box.
  double interpolate(double r, double u) const;
  /// Bilinear interpolation; zero outside the box.
  double interpolate_linear(double r, double u) const;
  /// Largest radius (resp. speed) carrying a nonzero value.
  double support_radius() const;
  double support_speed() const;

 private:
  RadialGrid grid_r_;
  SpeedGrid grid_u_;
  std::vector<double> values_;
};

/// Finite-volume weights int_{cell i} r^2 dr of the Poisson discretization.
std::vector<double> shell_volumes(const RadialGrid& grid);

/// rho(r) = 4 pi int f(r,u) u^2 du.
RadialField density_moment(const PhaseDensity& f);

/// Radial potential from the enclosed-mass form with vacuum matching
/// phi(r_max) = -M / (4 pi r_max). Rho must vanish at r_max.
RadialField poisson_solve(const RadialField& rho);

/// 1/2 int |grad phi|^2 dx, including the exterior vacuum tail.
double gradient_energy(const RadialField& phi);

/// -1/2 int phi rho dx, the integration-by-parts form of gradient_energy.
double gradient_energy_from_density(const RadialField& phi, const RadialField& rho);

FunctionalReport functionals(const PhaseDensity& f, const CasimirSpec& spec, const ModelParams& params);

/// Phase-space volume of {f > t} for each level t (levels sorted increasing).
std::vector<double> distribution_function(const PhaseDensity& f, std::span<const double> levels);

/// |f-g|_1 + |j(|f-g|)|_1 + |gamma_c (f-g)|_1.
double ej_distance(const PhaseDensity& f, const PhaseDensity& g, const CasimirSpec& spec,
                   const ModelParams& params);

/// Quadrature weights (16 pi^2 r^2 u^2 dr du, Simpson in each direction).
std::vector<double> phase_weights(const RadialGrid& grid_r, const SpeedGrid& grid_u);

void write_csv(const RadialField& field, const std::filesystem::path& path);
void write_csv(const PhaseDensity& f, const std::filesystem::path& path);
RadialField read_radial_csv(const std::filesystem::path& path);
PhaseDensity read_phase_csv(const std::filesystem::path& path);

}  // namespace vg
