#pragma once

#include <string>
#include <vector>

#include "smplab/adjoint/adjoint.hpp"
#include "smplab/numerics/stats.hpp"

namespace smplab {

/// H(x, u, p, q) = int l(x, u) + <p, b(x, u)> + sum_m <q_m, sigma_m(x, u)>.
/// The integral of l includes the boundary nodes at half weight.
double hamiltonian(const Scenario& s, const Field& x, const ControlPoint& u, const Field& p,
                   const std::vector<Field>& q);
/// Row-wise version on blocks (paths x n), control per path.
Eigen::VectorXd hamiltonian_rows(const Scenario& s, const RowMatrix& x, const ControlAt& u, const RowMatrix& p,
                                 const std::vector<RowMatrix>& q);

/// Per-path gap at step k < n_t:
///   G = H(xbar, v, ptilde, q) - H(xbar, ubar, ptilde, q) + 1/2 <Ptilde, Sigma_v>,
///   Sigma_v(l, m) = sum_k dsigma_k(l) dsigma_k(m), dsigma = sigma(xbar, v) - sigma(xbar, ubar).
Eigen::VectorXd smp_gap(const Scenario& s, std::size_t k, const ControlPoint& v, const BackwardPair1& pq,
                        const BackwardPair2& PQ);

struct SMPSample {
    std::size_t step = 0;
    ControlPoint v;
    Estimate gap;       // mean over paths with standard error
    double p05 = 0.0;   // 5th percentile of the per-path gap
};

/// Gaps over (sample step, lattice point). scale = max |mean gap|; the
/// necessary condition holds when min mean gap >= -tol * scale.
struct SMPReport {
    std::vector<SMPSample> samples;
    std::size_t argmin = 0;
    double min_mean = 0.0;
    double min_p05 = 0.0;
    double scale = 0.0;
    double tol = 0.05;
    bool pass = false;
};

/// Midpoints of `count` equal blocks of the time grid (never the terminal step).
std::vector<std::size_t> smp_sample_steps(std::size_t n_t, std::size_t count = 8);

SMPReport smp_report(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& PQ,
                     const std::vector<ControlPoint>& lattice, const std::vector<std::size_t>& steps,
                     double tol = 0.05);

/// One deterministic block control and its cost on the shared ensemble.
struct Candidate {
    std::vector<ControlPoint> blocks;
    Estimate J;
    bool excluded = false; // blew up
    bool tie = false;      // within one standard error of the minimum (paired)
};

struct BruteForceResult {
    std::vector<Candidate> table;
    std::size_t argmin = 0;
    std::size_t blocks = 0;
    ControlProcess best;
};

/// Every piecewise-constant control with `blocks` equal blocks over a finite
/// U (at most 3 points), all evaluated on the one ensemble e.
BruteForceResult brute_force_search(const Scenario& s, const PathEnsemble& e, std::size_t blocks = 8);

/// Paired difference J(b) - J(a) on the ensemble, with controls given by block values.
Estimate cost_difference(const Scenario& s, const PathEnsemble& e, const ControlProcess& a, const ControlProcess& b);

/// Deliberately bad control: `base` with one block replaced. Reports the
/// most negative mean gap along it and whether the matching spike (half a
/// block long, starting at that sample step) lowers J by more than 2 SE.
struct ContrapositiveReport {
    std::size_t block = 0;
    std::vector<ControlPoint> control;
    SMPReport smp;
    std::size_t step = 0;
    ControlPoint v;
    double spike_eps = 0.0;
    Estimate dJ;           // J(spiked) - J(bad), paired
    bool gap_found = false; // min mean gap < -threshold * scale
    bool descent = false;   // dJ.mean + 2 dJ.se < 0
};

ContrapositiveReport contrapositive_check(const Scenario& s, const PathEnsemble& e,
                                          const std::vector<ControlPoint>& base, std::size_t block,
                                          const ControlPoint& replacement, double threshold = 0.2);

} // namespace smplab
