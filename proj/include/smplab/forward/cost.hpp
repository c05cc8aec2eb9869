#pragma once

#include <vector>

#include "smplab/forward/state.hpp"
#include "smplab/numerics/stats.hpp"

namespace smplab {

/// Spatial integral of a nodal map including the two Dirichlet boundary
/// nodes (value f(0)) at half weight, so constants integrate exactly.
double integrate_nodal(std::span<const double> values, double boundary_value, double h) noexcept;

/// Per-path cost: left-endpoint rectangles in time of the integral of l,
/// plus the integral of h at the terminal step.
std::vector<double> path_costs(const Scenario& s, const StateHistory& hist);

/// Monte Carlo estimate of J with its standard error.
Estimate cost(const Scenario& s, const StateHistory& hist);

} // namespace smplab
