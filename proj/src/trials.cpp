#include <cmath>

#include "vg/rigidity.hpp"

namespace vg {

std::string to_string(TrialFamily family) {
  switch (family) {
    case TrialFamily::ground_state: return "ground_state";
    case TrialFamily::ellipsoid: return "ellipsoid";
    case TrialFamily::separable: return "separable";
    case TrialFamily::box: return "box";
    case TrialFamily::gaussian: return "gaussian";
  }
  return "unknown";
}

TrialFamily trial_family_from_string(const std::string& name) {
  for (auto f : {TrialFamily::ground_state, TrialFamily::ellipsoid, TrialFamily::separable, TrialFamily::box,
                 TrialFamily::gaussian})
    if (to_string(f) == name) return f;
  throw DomainError("unknown trial family '" + name + "'");
}

namespace {

double positive_power(double base, double k) {
  if (!(base > 0.0)) return 0.0;
  return k == 0.0 ? 1.0 : std::pow(base, k);
}

double shape_at(const std::vector<double>& shape, std::size_t i, double fallback) {
  return i < shape.size() ? shape[i] : fallback;
}

}  // namespace

PhaseDensity make_trial(TrialFamily family, const std::vector<double>& shape, const TrialBox& box) {
  if (!(box.r_max > 1.0 && box.u_max > 1.0)) throw DomainError("make_trial: the box must contain the unit support");
  const RadialGrid gr = RadialGrid::make(box.r_max, box.n);
  const SpeedGrid gu = SpeedGrid::make(box.u_max, box.m);
  switch (family) {
    case TrialFamily::ellipsoid: {
      const double k = shape_at(shape, 0, 1.0);
      if (!(k >= 0.0)) throw DomainError("make_trial: ellipsoid exponent must be nonnegative");
      return PhaseDensity::tabulate(gr, gu, [&](double r, double u) { return positive_power(1.0 - r * r - u * u, k); });
    }
    case TrialFamily::separable: {
      const double k1 = shape_at(shape, 0, 1.0), k2 = shape_at(shape, 1, 1.0);
      if (!(k1 >= 0.0 && k2 >= 0.0)) throw DomainError("make_trial: separable exponents must be nonnegative");
      return PhaseDensity::tabulate(gr, gu, [&](double r, double u) {
        return positive_power(1.0 - r * r, k1) * positive_power(1.0 - u * u, k2);
      });
    }
    case TrialFamily::box:
      return PhaseDensity::tabulate(gr, gu, [](double r, double u) { return r <= 1.0 && u <= 1.0 ? 1.0 : 0.0; });
    case TrialFamily::gaussian: {
      const double s = shape_at(shape, 0, 0.5);
      if (!(s > 0.0)) throw DomainError("make_trial: gaussian width must be positive");
      return PhaseDensity::tabulate(gr, gu, [&](double r, double u) {
        return r <= 1.0 && u <= 1.0 ? std::exp(-(r * r + u * u) / (2.0 * s * s)) : 0.0;
      });
    }
    case TrialFamily::ground_state:
      break;
  }
  throw DomainError("make_trial: ground-state trials come from solved states");
}

}  // namespace vg
