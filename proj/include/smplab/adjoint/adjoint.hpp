#pragma once

#include <memory>
#include <string>
#include <vector>

#include "smplab/adjoint/regression.hpp"
#include "smplab/forward/linear.hpp"
#include "smplab/numerics/implicit.hpp"
#include "smplab/numerics/stats.hpp"

namespace smplab {

/// Regression designs for every step k = 0..n_t-1 of a reference
/// trajectory. They depend on xbar only and are shared by both adjoints.
class DesignSet {
public:
    DesignSet(const Scenario& s, const StateHistory& xbar, const RegressionBasis& basis);

    std::size_t n_t() const noexcept { return designs_.size(); }
    const StepDesign& at(std::size_t k) const { return designs_.at(k); }
    /// Standardized design block of step k, recomputed from xbar.
    RowMatrix X(std::size_t k) const;
    const StateHistory& xbar() const noexcept { return *xbar_; }

private:
    const StateHistory* xbar_;
    std::vector<StepDesign> designs_;
};

/// Discrete first order adjoint. With R = (I - dt A)^{-1} and E_k the
/// regression estimate of the conditional expectation given x_k:
///   p_N = h_x(xbar_N),
///   ptilde_k = R E_k[p_{k+1}],
///   q^m_k = R E_k[(p_{k+1} - E_k p_{k+1}) dW^m_k] / dt,
///   p_k = ptilde_k + dt (b_x ptilde_k + sum_m sigma_x,m q^m_k + l_x).
/// This ordering makes E<h_x, y_N> + sum dt E<l_x, y_k> equal to
/// sum dt E[<ptilde_k, phi_k> + sum_m <q^m_k, psi^m_k>] for the forward
/// scheme of simulate_linear, up to regression error.
class BackwardPair1 {
public:
    const Scenario& scenario() const noexcept { return *s_; }
    const DesignSet& designs() const noexcept { return *designs_; }
    std::shared_ptr<const DesignSet> shared_designs() const noexcept { return designs_; }
    std::size_t n_t() const noexcept { return ptilde_.size(); }

    /// Per-path ptilde_k and q_k (K blocks), k < n_t.
    void evaluate(std::size_t k, RowMatrix& ptilde, std::vector<RowMatrix>& q) const;
    /// Per-path p_k, including the terminal k = n_t.
    RowMatrix p(std::size_t k) const;
    /// Regressed representation: fits with R already applied.
    const LinearFit& ptilde_fit(std::size_t k) const { return ptilde_.at(k); }
    const LinearFit& q_fit(std::size_t k, std::size_t m) const { return q_.at(k).at(m); }
    const std::vector<RegressionDiagnostics>& diagnostics() const noexcept { return diagnostics_; }
    /// Seed and size of the ensemble the pair was trained on.
    std::uint64_t ensemble_seed() const noexcept { return seed_; }
    std::size_t ensemble_paths() const noexcept { return paths_; }

private:
    friend BackwardPair1 solve_adjoint1(const Scenario&, const StateHistory&, const PathEnsemble&,
                                        const RegressionBasis&);
    friend BackwardPair1 solve_adjoint1(const Scenario&, std::shared_ptr<const DesignSet>, const PathEnsemble&);

    const Scenario* s_ = nullptr;
    std::shared_ptr<const DesignSet> designs_;
    std::vector<LinearFit> ptilde_;
    std::vector<std::vector<LinearFit>> q_;
    std::vector<RegressionDiagnostics> diagnostics_;
    std::uint64_t seed_ = 0;
    std::size_t paths_ = 0;
};

/// xbar and e must outlive the result; xbar must have been simulated on e.
BackwardPair1 solve_adjoint1(const Scenario& s, const StateHistory& xbar, const PathEnsemble& e,
                             const RegressionBasis& basis);
BackwardPair1 solve_adjoint1(const Scenario& s, std::shared_ptr<const DesignSet> designs, const PathEnsemble& e);

/// Terminal data of the second order adjoint.
struct Terminal2 {
    enum class Kind { mollified, diagonal, zero };
    Kind kind = Kind::mollified;
    double eta = 0.0;

    static Terminal2 mollified_at(double eta) { return Terminal2{Kind::mollified, eta}; }
    static Terminal2 diagonal() { return Terminal2{Kind::diagonal, 0.0}; }
    std::string tag() const;
};

/// Discrete second order adjoint on the square, same structure as the first:
///   P_N = terminal (heat_mollifier of h_xx(xbar_N), or delta_star of it),
///   Ptilde_k = R2 E_k[P_{k+1}], Q^m_k = R2 E_k[(P_{k+1} - E_k P_{k+1}) dW^m] / dt,
///   P_k = (1 + dt a2) Ptilde_k + dt sum_m s2_m Q^m_k
///         + dt delta_star(l_xx + b_xx ptilde_k + sum_m sigma_xx,m q^m_k)
/// with a2 = b_x(l) + b_x(m) + sum sigma_x(l) sigma_x(m), s2 = sigma_x(l) + sigma_x(m).
/// Only the upper triangle is regressed, so every fit is exactly symmetric.
class BackwardPair2 {
public:
    const Scenario& scenario() const noexcept { return *s_; }
    const Terminal2& terminal_kind() const noexcept { return terminal_; }
    std::string tag() const { return terminal_.tag(); }
    std::size_t n_t() const noexcept { return Ptilde_.size(); }

    void evaluate(std::size_t k, RowMatrix& Ptilde, std::vector<RowMatrix>& Q) const;
    /// Per-path terminal data P_N (paths x n*n).
    RowMatrix terminal() const;
    const LinearFit& Ptilde_fit(std::size_t k) const { return Ptilde_.at(k); }
    const LinearFit& Q_fit(std::size_t k, std::size_t m) const { return Q_.at(k).at(m); }
    const DesignSet& designs() const noexcept { return *designs_; }
    const std::vector<RegressionDiagnostics>& diagnostics() const noexcept { return diagnostics_; }

private:
    friend BackwardPair2 solve_adjoint2(const Scenario&, const BackwardPair1&, const PathEnsemble&, const Terminal2&);

    const Scenario* s_ = nullptr;
    Terminal2 terminal_;
    std::shared_ptr<const DesignSet> designs_;
    std::vector<LinearFit> Ptilde_;
    std::vector<std::vector<LinearFit>> Q_;
    std::vector<RegressionDiagnostics> diagnostics_;
};

BackwardPair2 solve_adjoint2(const Scenario& s, const BackwardPair1& pq, const PathEnsemble& e,
                             const Terminal2& terminal);
/// Warns (does not fail) when eta is below the grid resolution.
BackwardPair2 solve_adjoint2_mollified(const Scenario& s, const BackwardPair1& pq, const PathEnsemble& e,
                                       double eta);

/// Monte Carlo norms of a second order pair, computed from the fits.
struct Adjoint2Norms {
    double sup_hminus1 = 0.0;   // sup_k E ||Ptilde_k||^2_{H^-1}, terminal included
    double l2_time = 0.0;       // sum_k dt E ||Ptilde_k||^2_{L2}
    double q_hminus1_time = 0.0; // sum_k dt sum_m E ||Q^m_k||^2_{H^-1}
    /// sup + 2 l2_time + q_hminus1_time.
    double apriori() const noexcept { return sup_hminus1 + 2.0 * l2_time + q_hminus1_time; }
};
Adjoint2Norms adjoint2_norms(const BackwardPair2& PQ, const SpectralBasis& basis);

/// Distance of two pairs on the same designs: sum_k dt E||dP_k||^2_{L2}
/// (square root taken) and sup_k E||dP_k||^2_{H^-1}.
struct PairDistance {
    double l2 = 0.0;
    double sup_hminus1 = 0.0;
};
PairDistance adjoint2_distance(const BackwardPair2& a, const BackwardPair2& b, const SpectralBasis& basis);

struct CauchyReport {
    std::vector<double> eta;
    std::vector<double> apriori;                   // per eta
    std::vector<double> terminal_distance;         // rms over paths of ||h^eta - delta_star(h_xx)||_{H^-1}
    std::vector<PairDistance> increments;          // between consecutive etas
    std::vector<PairDistance> distance_to_limit;   // per eta, to the diagonal-terminal pair
    bool increments_decreasing = true;
    bool terminal_decreasing = true;
    bool apriori_bounded = true;                   // no growth above 10% along the ladder
    double apriori_limit = 0.0;                    // same statistic for the diagonal-terminal pair
};

struct Limit2 {
    BackwardPair2 limit;
    CauchyReport report;
};

/// Solves the pair with diagonal terminal data directly ("limit" tag) and
/// certifies it against the mollified pairs along the decreasing ladder.
Limit2 solve_adjoint2_limit(const Scenario& s, const BackwardPair1& pq, const PathEnsemble& e,
                            const std::vector<double>& eta_ladder);

/// Upper triangle (i <= j, row-major) of every n x n row, and its inverse.
void pack_upper(const RowMatrix& full, std::size_t n, RowMatrix& packed);
void unpack_upper(const RowMatrix& packed, std::size_t n, RowMatrix& full);

/// Per-path spectral H^gamma squared norms of tensor rows (paths x n*n).
Eigen::VectorXd tensor_row_norms_squared(const RowMatrix& rows, const SpectralBasis& basis, double gamma);

} // namespace smplab
