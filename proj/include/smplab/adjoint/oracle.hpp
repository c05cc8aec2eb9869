#pragma once

#include <vector>

#include "smplab/adjoint/adjoint.hpp"

namespace smplab {

/// Dense backward sweeps along one path of a noise-free reference, on the
/// same time grid as the regression solver. Throws ValidationError
/// ("oracle.zero_noise") when sigma does not vanish along the path.
std::vector<Eigen::VectorXd> deterministic_ptilde(const Scenario& s, const StateHistory& xbar, std::size_t path = 0);

/// Ptilde_k as row-major n*n vectors; `ptilde` from deterministic_ptilde.
std::vector<Eigen::VectorXd> deterministic_Ptilde(const Scenario& s, const StateHistory& xbar,
                                                  const std::vector<Eigen::VectorXd>& ptilde,
                                                  const Terminal2& terminal, std::size_t path = 0);

/// Linear ansatz ptilde_k = G_k xbar_k + g_k for drifts affine in x with a
/// deterministic control, sigma independent of x and quadratic costs.
/// Substituting p_{k+1} = M_{k+1} x_{k+1} + m_{k+1} into the sweep gives
///   M_N = h_xx I,  m_N = h_x(0) 1,
///   G_k = R M_{k+1} R (1 + dt beta),  g_k = R M_{k+1} R dt b(0, u_k) 1 + R m_{k+1},
///   M_k = (1 + dt beta) G_k + dt l_xx I,  m_k = (1 + dt beta) g_k + dt l_x(0, u_k) 1.
/// Throws ValidationError ("oracle.affine") when the scenario is not of
/// that form.
struct AffineAdjoint {
    std::vector<Eigen::MatrixXd> G;
    std::vector<Eigen::VectorXd> g;

    /// Per-path ptilde_k for a block of states (paths x n).
    RowMatrix ptilde(std::size_t k, const RowMatrix& x) const;
};
AffineAdjoint affine_adjoint(const Scenario& s, const ControlProcess& u);

/// Dense matrix of A.
Eigen::MatrixXd dense_operator(const EllipticOperator& op);

} // namespace smplab
