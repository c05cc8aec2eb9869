#pragma once

#include <vector>

#include "smplab/forward/linear.hpp"
#include "smplab/numerics/stats.hpp"

namespace smplab {

/// Moments of the spike expansion for one eps, all on common noise.
/// Suprema over steps are taken of the per-step expectations; each
/// estimate carries the standard error at the maximizing step.
struct ExpansionStats {
    double eps = 0.0;
    Estimate y_moment; // sup_k E ||y_k||^2
    Estimate z_moment; // sup_k E ||z_k||
    Estimate residual; // sup_k E ||x^eps_k - xbar_k - y_k - z_k||^2
    Estimate hgamma;   // E ||y_N||^2 in the spectral H^gamma norm
    std::size_t argmax_residual = 0;
};

ExpansionStats expansion_statistics(const Scenario& s, const StateHistory& xbar, const ControlProcess& spike,
                                    const PathEnsemble& e, double gamma = 0.25);

struct ResidualReport {
    std::vector<double> eps;
    std::vector<Estimate> residual;
    SlopeFit fit;
    bool identically_zero = false;
};

/// Residual of the second-order expansion over the configured ladder
/// (eps = ladder * T) at the configured spike time and value. The reference
/// and perturbed states share the ensemble by construction.
ResidualReport residual_check(const Scenario& s, const PathEnsemble& e);

/// Squared L2 norm of each row, h * sum.
Eigen::VectorXd row_norms_squared(const RowMatrix& y, double h);

} // namespace smplab
