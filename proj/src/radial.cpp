#include "vg/radial.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "vg/quadrature.hpp"

namespace vg {

namespace {

// Cubic Lagrange weights on four consecutive nodes of a uniform grid.
struct Stencil {
  std::size_t first = 0;
  std::array<double, 4> w{};
  std::size_t width = 4;
};

Stencil cubic_stencil(const UniformGrid& g, double x) {
  Stencil s;
  const double h = g.h();
  if (g.n < 4) {
    const double t = std::clamp(x / h, 0.0, static_cast<double>(g.n - 1));
    std::size_t i = std::min(static_cast<std::size_t>(t), g.n - 2);
    const double frac = t - static_cast<double>(i);
    s.first = i;
    s.width = 2;
    s.w = {1.0 - frac, frac, 0.0, 0.0};
    return s;
  }
  const double t = x / h;
  long i = static_cast<long>(std::floor(t)) - 1;
  i = std::clamp(i, 0L, static_cast<long>(g.n) - 4);
  s.first = static_cast<std::size_t>(i);
  const double y = t - static_cast<double>(i);  // position in units of h relative to first node
  const double y0 = y, y1 = y - 1.0, y2 = y - 2.0, y3 = y - 3.0;
  s.w[0] = -y1 * y2 * y3 / 6.0;
  s.w[1] = y0 * y2 * y3 / 2.0;
  s.w[2] = -y0 * y1 * y3 / 2.0;
  s.w[3] = y0 * y1 * y2 / 6.0;
  return s;
}

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path, std::size_t columns,
                                           const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != expected_header)
    throw DomainError(path.string() + ": expected header '" + expected_header + "'");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != columns) throw DomainError(path.string() + ": malformed row");
    rows.push_back(std::move(row));
  }
  return rows;
}

UniformGrid grid_from_nodes(std::vector<double> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return UniformGrid::make(nodes.back(), nodes.size());
}

}  // namespace

UniformGrid UniformGrid::make(double max, std::size_t n) {
  if (!(max > 0.0)) throw DomainError("grid extent must be positive");
  if (n < 2) throw DomainError("grid needs at least two nodes");
  return UniformGrid{max, n};
}

std::vector<double> UniformGrid::nodes() const {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = node(i);
  out.back() = max;
  return out;
}

RadialField RadialField::zeros(const RadialGrid& grid) { return RadialField{grid, std::vector<double>(grid.n, 0.0)}; }

double RadialField::interpolate(double r) const {
  const Stencil s = cubic_stencil(grid, r);
  double v = 0.0;
  for (std::size_t k = 0; k < s.width; ++k) v += s.w[k] * values[s.first + k];
  return v;
}

PhaseDensity::PhaseDensity(const RadialGrid& grid_r, const SpeedGrid& grid_u)
    : grid_r_(grid_r), grid_u_(grid_u), values_(grid_r.n * grid_u.n, 0.0) {}

void PhaseDensity::validate() const {
  for (double v : values_)
    if (!(v >= 0.0)) throw DomainError("phase density must be nonnegative");
  for (std::size_t j = 0; j < grid_u_.n; ++j)
    if (at(grid_r_.n - 1, j) != 0.0) throw DomainError("phase density must vanish at r = r_max");
  for (std::size_t i = 0; i < grid_r_.n; ++i)
    if (at(i, grid_u_.n - 1) != 0.0) throw DomainError("phase density must vanish at u = u_max");
}

double PhaseDensity::sup() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, v);
  return s;
}

double PhaseDensity::interpolate(double r, double u) const {
  if (r < 0.0 || u < 0.0 || r > grid_r_.max || u > grid_u_.max) return 0.0;
  const Stencil sr = cubic_stencil(grid_r_, r);
  const Stencil su = cubic_stencil(grid_u_, u);
  double v = 0.0;
  for (std::size_t a = 0; a < sr.width; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < su.width; ++b) row += su.w[b] * at(sr.first + a, su.first + b);
    v += sr.w[a] * row;
  }
  return std::max(v, 0.0);
}

double PhaseDensity::interpolate_linear(double r, double u) const {
  if (r < 0.0 || u < 0.0 || r > grid_r_.max || u > grid_u_.max) return 0.0;
  const double tr = r / grid_r_.h();
  const double tu = u / grid_u_.h();
  const std::size_t i = std::min(static_cast<std::size_t>(tr), grid_r_.n - 2);
  const std::size_t j = std::min(static_cast<std::size_t>(tu), grid_u_.n - 2);
  const double a = tr - static_cast<double>(i);
  const double b = tu - static_cast<double>(j);
  return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) + (1 - a) * b * at(i, j + 1) +
         a * b * at(i + 1, j + 1);
}

double PhaseDensity::support_radius() const {
  for (std::size_t i = grid_r_.n; i-- > 0;)
    for (std::size_t j = 0; j < grid_u_.n; ++j)
      if (at(i, j) > 0.0) return grid_r_.node(i);
  return 0.0;
}

double PhaseDensity::support_speed() const {
  for (std::size_t j = grid_u_.n; j-- > 0;)
    for (std::size_t i = 0; i < grid_r_.n; ++i)
      if (at(i, j) > 0.0) return grid_u_.node(j);
  return 0.0;
}

std::vector<double> shell_volumes(const RadialGrid& grid) {
  const double h = grid.h();
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double lo = i == 0 ? 0.0 : grid.node(i) - 0.5 * h;
    const double hi = i + 1 == grid.n ? grid.max : grid.node(i) + 0.5 * h;
    v[i] = (hi * hi * hi - lo * lo * lo) / 3.0;
  }
  return v;
}

RadialField density_moment(const PhaseDensity& f) {
  const auto& gu = f.grid_u();
  auto wu = quad::simpson_weights(gu.n, gu.h());
  for (std::size_t j = 0; j < gu.n; ++j) wu[j] *= 4.0 * kPi * gu.node(j) * gu.node(j);
  RadialField rho = RadialField::zeros(f.grid_r());
  for (std::size_t i = 0; i < f.grid_r().n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < gu.n; ++j) s += wu[j] * f.at(i, j);
    rho.values[i] = s;
  }
  return rho;
}

RadialField poisson_solve(const RadialField& rho) {
  const auto& g = rho.grid;
  const std::size_t n = g.n;
  if (rho.values.size() != n) throw DomainError("poisson_solve: field size does not match its grid");
  for (double v : rho.values)
    if (!(v >= 0.0)) throw DomainError("poisson_solve: density must be nonnegative");
  if (rho.values.back() > 0.0)
    throw DomainError("poisson_solve: density support touches r_max, vacuum boundary condition unusable");

  const auto vol = shell_volumes(g);
  const double h = g.h();
  // flux[i] = enclosed mass / 4 pi through r_{i+1/2}
  std::vector<double> flux(n, 0.0);
  double enclosed = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    enclosed += vol[i] * rho.values[i];
    flux[i] = enclosed;
  }
  const double total = enclosed + vol[n - 1] * rho.values[n - 1];

  RadialField phi = RadialField::zeros(g);
  phi.values[n - 1] = -total / g.max;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double mid = g.node(i) + 0.5 * h;
    phi.values[i] = phi.values[i + 1] - h * flux[i] / (mid * mid);
  }
  return phi;
}

double gradient_energy(const RadialField& phi) {
  const auto& g = phi.grid;
  const double h = g.h();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < g.n; ++i) {
    const double mid = g.node(i) + 0.5 * h;
    const double d = (phi.values[i + 1] - phi.values[i]) / h;
    s += h * mid * mid * d * d;
  }
  const double tail = g.max * phi.values.back() * phi.values.back();
  return 2.0 * kPi * (s + tail);
}

double gradient_energy_from_density(const RadialField& phi, const RadialField& rho) {
  if (!(phi.grid == rho.grid)) throw DomainError("gradient_energy_from_density: grid mismatch");
  const auto vol = shell_volumes(phi.grid);
  double s = 0.0;
  for (std::size_t i = 0; i < phi.grid.n; ++i) s += vol[i] * phi.values[i] * rho.values[i];
  return -2.0 * kPi * s;
}

std::vector<double> phase_weights(const RadialGrid& grid_r, const SpeedGrid& grid_u) {
  const auto wr = quad::simpson_weights(grid_r.n, grid_r.h());
  const auto wu = quad::simpson_weights(grid_u.n, grid_u.h());
  std::vector<double> w(grid_r.n * grid_u.n);
  for (std::size_t i = 0; i < grid_r.n; ++i) {
    const double r = grid_r.node(i);
    for (std::size_t j = 0; j < grid_u.n; ++j) {
      const double u = grid_u.node(j);
      w[i * grid_u.n + j] = 16.0 * kPi * kPi * r * r * u * u * wr[i] * wu[j];
    }
  }
  return w;
}

FunctionalReport functionals(const PhaseDensity& f, const CasimirSpec& spec, const ModelParams& params) {
  const auto w = phase_weights(f.grid_r(), f.grid_u());
  const auto& gu = f.grid_u();
  std::vector<double> gamma(gu.n);
  for (std::size_t j = 0; j < gu.n; ++j) gamma[j] = kinetic_weight(params, gu.node(j));

  double m1 = 0.0, mj = 0.0, ekin = 0.0;
  for (std::size_t i = 0; i < f.grid_r().n; ++i) {
    for (std::size_t j = 0; j < gu.n; ++j) {
      const double v = f.at(i, j);
      if (v == 0.0) continue;
      const double wij = w[i * gu.n + j];
      m1 += wij * v;
      mj += wij * spec.eval_j(v);
      ekin += wij * gamma[j] * v;
    }
  }
  const double epot = gradient_energy(poisson_solve(density_moment(f)));
  return FunctionalReport::from_parts(m1, mj, ekin, epot);
}

std::vector<double> distribution_function(const PhaseDensity& f, std::span<const double> levels) {
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (levels[k] < levels[k - 1]) throw DomainError("distribution_function: levels must be sorted");

  // Each cell is split into sub x sub pieces evaluated at their centres with
  // the bilinear interpolant; the resulting (value, volume) samples are sorted
  // once and queried per level.
  constexpr int sub = 4;
  const auto& gr = f.grid_r();
  const auto& gu = f.grid_u();
  const double hr = gr.h(), hu = gu.h();
  std::vector<std::pair<double, double>> samples;
  for (std::size_t i = 0; i + 1 < gr.n; ++i) {
    for (std::size_t j = 0; j + 1 < gu.n; ++j) {
      const double c00 = f.at(i, j), c10 = f.at(i + 1, j), c01 = f.at(i, j + 1), c11 = f.at(i + 1, j + 1);
      if (c00 == 0.0 && c10 == 0.0 && c01 == 0.0 && c11 == 0.0) continue;
      for (int a = 0; a < sub; ++a) {
        const double s = (a + 0.5) / sub;
        const double r = gr.node(i) + s * hr;
        for (int b = 0; b < sub; ++b) {
          const double t = (b + 0.5) / sub;
          const double u = gu.node(j) + t * hu;
          const double v = (1 - s) * (1 - t) * c00 + s * (1 - t) * c10 + (1 - s) * t * c01 + s * t * c11;
          const double vol = 16.0 * kPi * kPi * r * r * u * u * hr * hu / (sub * sub);
          samples.emplace_back(v, vol);
        }
      }
    }
  }
  std::sort(samples.begin(), samples.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<double> cumulative(samples.size() + 1, 0.0);
  for (std::size_t k = 0; k < samples.size(); ++k) cumulative[k + 1] = cumulative[k] + samples[k].second;

  std::vector<double> out(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double t = levels[k];
    // number of samples with value > t
    const auto it = std::partition_point(samples.begin(), samples.end(), [t](const auto& s) { return s.first > t; });
    out[k] = cumulative[static_cast<std::size_t>(it - samples.begin())];
  }
  return out;
}

double ej_distance(const PhaseDensity& f, const PhaseDensity& g, const CasimirSpec& spec,
                   const ModelParams& params) {
  if (!(f.grid_r() == g.grid_r()) || !(f.grid_u() == g.grid_u()))
    throw DomainError("ej_distance: densities live on different grids");
  const auto w = phase_weights(f.grid_r(), f.grid_u());
  const auto& gu = f.grid_u();
  double s = 0.0;
  for (std::size_t i = 0; i < f.grid_r().n; ++i) {
    for (std::size_t j = 0; j < gu.n; ++j) {
      const double d = std::abs(f.at(i, j) - g.at(i, j));
      if (d == 0.0) continue;
      s += w[i * gu.n + j] * (d + spec.eval_j(d) + kinetic_weight(params, gu.node(j)) * d);
    }
  }
  return s;
}

void write_csv(const RadialField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "r,value\n";
  for (std::size_t i = 0; i < field.grid.n; ++i)
    out << format17(field.grid.node(i)) << ',' << format17(field.values[i]) << '\n';
}

void write_csv(const PhaseDensity& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "r,u,f\n";
  for (std::size_t i = 0; i < f.grid_r().n; ++i)
    for (std::size_t j = 0; j < f.grid_u().n; ++j)
      out << format17(f.grid_r().node(i)) << ',' << format17(f.grid_u().node(j)) << ',' << format17(f.at(i, j))
          << '\n';
}

RadialField read_radial_csv(const std::filesystem::path& path) {
  const auto rows = read_rows(path, 2, "r,value");
  if (rows.size() < 2) throw DomainError(path.string() + ": too few rows");
  RadialField field;
  field.grid = UniformGrid::make(rows.back()[0], rows.size());
  for (const auto& row : rows) field.values.push_back(row[1]);
  return field;
}

PhaseDensity read_phase_csv(const std::filesystem::path& path) {
  const auto rows = read_rows(path, 3, "r,u,f");
  std::vector<double> rs, us;
  for (const auto& row : rows) {
    rs.push_back(row[0]);
    us.push_back(row[1]);
  }
  const auto gr = grid_from_nodes(rs);
  const auto gu = grid_from_nodes(us);
  if (gr.n * gu.n != rows.size()) throw DomainError(path.string() + ": not a tensor grid");
  PhaseDensity f(gr, gu);
  for (std::size_t k = 0; k < rows.size(); ++k) f.values()[k] = rows[k][2];
  return f;
}

}  // namespace vg
