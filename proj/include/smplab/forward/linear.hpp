#pragma once

#include <functional>
#include <vector>

#include "smplab/forward/state.hpp"

namespace smplab {

/// Coefficients and sources of one step of a linear SPDE driven by the
/// ensemble noise:
///   y_{k+1} = R [ y_k + dt (a . y_k + phi) + sum_m (s_m . y_k + psi_m) dW^m ].
/// Blocks are paths x d (d = n on the line, n*n on the square). Empty
/// matrices stand for zero.
struct LinearStep {
    RowMatrix a;
    std::vector<RowMatrix> s;
    RowMatrix phi;
    std::vector<RowMatrix> psi;
};

/// Fills the step-k coefficients given y_k; must read nothing later than k.
using LinearSystem = std::function<void(std::size_t k, const RowMatrix& y, LinearStep& step)>;
/// Called with y_k for k = 0..n_t.
using LinearObserver = std::function<void(std::size_t k, const RowMatrix& y)>;

/// Linear SPDE on the line started from zero.
void simulate_linear(const Scenario& s, const PathEnsemble& e, const LinearSystem& system,
                     const LinearObserver& observe);
/// Same on the square with the Kronecker-sum operator.
void simulate_linear_tensor(const Scenario& s, const PathEnsemble& e, const LinearSystem& system,
                            const LinearObserver& observe);
/// Convenience: full history of a line solution.
std::vector<RowMatrix> simulate_linear_history(const Scenario& s, const PathEnsemble& e, const LinearSystem& system);

/// Coefficients frozen along a reference trajectory xbar with its realized
/// controls, evaluated one step at a time.
class Linearization {
public:
    Linearization(const Scenario& s, const StateHistory& xbar);

    const Scenario& scenario() const noexcept { return *s_; }
    const StateHistory& xbar() const noexcept { return *xbar_; }
    ControlAt reference(std::size_t k) const;
    ControlAt perturbed(std::size_t k, const ControlProcess& spike) const;

    void drift(const DriftMap& f, std::size_t k, const ControlAt& u, RowMatrix& out) const;
    void noise(const NoiseMap& f, std::size_t m, std::size_t k, const ControlAt& u, RowMatrix& out) const;

    /// a = b_x and s_m = sigma_x,m along (xbar, ubar).
    void first_order(std::size_t k, RowMatrix& a, std::vector<RowMatrix>& s) const;
    /// Square multipliers b_x(l)+b_x(m)+sum sigma_x(l)sigma_x(m) and sigma_x(l)+sigma_x(m).
    void second_order(std::size_t k, RowMatrix& a2, std::vector<RowMatrix>& s2) const;

private:
    const Scenario* s_;
    const StateHistory* xbar_;
};

/// First variational equation for a spike: sources are the coefficient
/// jumps b(xbar, u^eps) - b(xbar, ubar) and likewise for sigma.
LinearSystem first_variation_system(const Linearization& lin, const ControlProcess& spike);

/// Joint sweep of y^eps and z^eps (second variational equation with
/// sources 1/2 b_xx y^2 + (b_x(u^eps) - b_x(ubar)) y and the noise analogue).
using ExpansionObserver = std::function<void(std::size_t k, const RowMatrix& y, const RowMatrix& z)>;
void simulate_variations(const Linearization& lin, const ControlProcess& spike, const PathEnsemble& e,
                         const ExpansionObserver& observe);

/// Joint sweep of y^eps and the tensor process Y^eps on the square.
using TensorObserver = std::function<void(std::size_t k, const RowMatrix& y, const RowMatrix& Y)>;
void simulate_tensor(const Linearization& lin, const ControlProcess& spike, const PathEnsemble& e,
                     const TensorObserver& observe);

/// Tensor sources Phi^eps, Psi^eps at step k from y^eps_k; false when the
/// spike is inactive at k (all sources vanish).
bool tensor_sources(const Linearization& lin, const ControlProcess& spike, std::size_t k, const RowMatrix& y,
                    RowMatrix& Phi, std::vector<RowMatrix>& Psi);

/// Row-wise outer products: out(p, i*n+j) = a(p,i) b(p,j).
void outer_rows(const RowMatrix& a, const RowMatrix& b, RowMatrix& out);

} // namespace smplab
