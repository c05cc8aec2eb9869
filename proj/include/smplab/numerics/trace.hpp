#pragma once

#include <functional>

#include "smplab/numerics/grid.hpp"

namespace smplab {

/// delta(w)(i) = w(i, i).
Field delta_trace(const TensorField& w);

/// Discrete adjoint of delta_trace: diagonal entries f(i)/h, zero elsewhere,
/// so that <delta_star(f), w> on the square equals <f, delta_trace(w)>.
TensorField delta_star(const Field& f);

/// Heat-kernel smoothing of delta_star(hxx(xbar_T)):
/// (i,j) -> (hxx(x_i) + hxx(x_j))/2 * (4 pi eta)^{-1/2} exp(-(l_i - l_j)^2 / (4 eta)).
/// Warns when eta < (2h)^2.
TensorField heat_mollifier(const Field& xbar_terminal, const std::function<double(double)>& hxx, double eta);

/// Same kernel for already-evaluated diagonal weights f(i) = hxx(x_i).
TensorField heat_mollifier(const Field& weights, double eta);

} // namespace smplab
