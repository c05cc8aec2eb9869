#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smplab/adjoint/adjoint.hpp"
#include "smplab/numerics/stats.hpp"

namespace smplab {

/// Sources (phi, psi) of a first order probe. `fill` sees only the step
/// index and the reference state at that step, so every probe is adapted.
/// Blocks are paths x n; an empty matrix means zero.
struct Probe1 {
    std::string name;
    std::function<void(std::size_t k, const RowMatrix& xbar_k, RowMatrix& phi, std::vector<RowMatrix>& psi)> fill;
};

/// Same on the square (blocks paths x n*n).
struct Probe2 {
    std::string name;
    std::function<void(std::size_t k, const RowMatrix& xbar_k, RowMatrix& Phi, std::vector<RowMatrix>& Psi)> fill;
};

/// lhs and rhs of an adjoint state identity on common noise. The check
/// passes when |mean(lhs - rhs)| + 2 se <= tol |rhs|, or when both sides
/// vanish identically.
struct DualityReport {
    std::string id;
    std::string probe;
    Estimate lhs;
    Estimate rhs;
    Estimate diff;
    double relative_gap = 0.0;
    std::size_t paths = 0;
    bool crn = false;
    double tol = 0.0;
    bool pass = false;
};

/// Fills the derived fields from per-path samples.
DualityReport make_report(std::string id, std::string probe, const std::vector<double>& lhs,
                          const std::vector<double>& rhs, bool crn, double tol);

/// `count` smooth deterministic probes drawn from `seed`: sums of the first
/// three sine modes with time-affine coefficients. With `adapted`, the last
/// probe is replaced by one proportional to the reference state.
std::vector<Probe1> random_probes1(const Scenario& s, std::size_t count, std::uint64_t seed, bool adapted = true);
/// Symmetric tensor probes built from products of sine modes; Phi is
/// positive semidefinite.
std::vector<Probe2> random_probes2(const Scenario& s, std::size_t count, std::uint64_t seed);
Probe1 zero_probe1();
Probe2 zero_probe2();

/// E[<h_x, y_N> + sum dt <l_x, y_k>] against sum dt E[<ptilde, phi> + <q, psi>],
/// y from simulate_linear with the probe sources. The report is marked as
/// not on common noise (and fails) when e is not the training ensemble.
DualityReport check_duality1(const Scenario& s, const BackwardPair1& pq, const PathEnsemble& e, const Probe1& probe,
                             double tol = 0.05);

/// E[sum dt <f_k, delta(Y_k)> + <P_N, Y_N>] against sum dt E[<Ptilde, Phi> + <Q, Psi>],
/// f_k = l_xx + b_xx ptilde + sum sigma_xx q, Y from simulate_linear_tensor.
DualityReport check_duality2(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& PQ,
                             const PathEnsemble& e, const Probe2& probe, double tol = 0.10);

/// Second order identity driven by the spike sources (Phi^eps, Psi^eps).
/// `tensor` evaluates the left side through the tensor process Y^eps;
/// otherwise through y^eps (x) y^eps, the quadratic representation.
DualityReport check_spike_duality2(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& PQ,
                                   const PathEnsemble& e, const ControlProcess& spike, bool tensor, double tol);

/// Limit pair identity: E[sum dt <f_k, y_k^2> + <h_xx(xbar_N), y_N^2>] against
/// sum dt E[<Ptilde, Phi^eps> + <Q, Psi^eps>].
DualityReport check_limit_duality2(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& limit,
                           const PathEnsemble& e, const ControlProcess& spike, double tol = 0.10);

} // namespace smplab
