#pragma once

#include "vg/steady.hpp"

namespace vg::detail {

/// Tabulates Q on the state's radial grid and a speed grid sized from the
/// support bound; psi is taken from the node values of phi.
PhaseDensity tabulate_q(const GroundState& state, const TabulationOptions& tab);

GroundState trivial_state(const CasimirSpec& spec, const ModelParams& params, double mu, const RadialGrid& grid,
                          const TabulationOptions& tab, const char* route);

double relative_gap(double lhs, double rhs);

}  // namespace vg::detail
