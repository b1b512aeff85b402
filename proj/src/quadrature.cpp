#include "vg/quadrature.hpp"

#include <stdexcept>

namespace vg::quad {

std::vector<double> simpson_weights(std::size_t n, double h) {
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  const std::size_t intervals = n - 1;
  if (intervals == 1) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  std::size_t simpson_end = intervals;  // last node index covered by Simpson panels
  if (intervals % 2 == 1) simpson_end = intervals - 3;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (intervals % 2 == 1) {
    const std::size_t i = simpson_end;
    w[i] += 3.0 * h / 8.0;
    w[i + 1] += 9.0 * h / 8.0;
    w[i + 2] += 9.0 * h / 8.0;
    w[i + 3] += 3.0 * h / 8.0;
  }
  return w;
}

double simpson(std::span<const double> values, double h) {
  const auto w = simpson_weights(values.size(), h);
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
  return s;
}

}  // namespace vg::quad
