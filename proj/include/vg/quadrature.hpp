#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace vg::quad {

/// Composite Simpson weights for n uniformly spaced nodes with spacing h.
/// An odd interval count closes with the 3/8 rule; two nodes fall back to
/// the trapezoid rule.
std::vector<double> simpson_weights(std::size_t n, double h);

double simpson(std::span<const double> values, double h);

/// Adaptive Gauss-Kronrod (G15/K31) on [a, b] to relative tolerance tol.
template <class F>
double adaptive(F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 18) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, tol);
}

}  // namespace vg::quad
