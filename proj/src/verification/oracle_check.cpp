#include "smplab/verification/oracle_check.hpp"

#include <algorithm>
#include <cmath>

#include "smplab/adjoint/oracle.hpp"

namespace smplab {

namespace {

OracleReport finish(std::string id, const std::vector<double>& err, const std::vector<double>& ref, double tol)
{
    OracleReport r;
    r.id = std::move(id);
    r.tol = tol;
    double emax = 0.0;
    double rmax = 0.0;
    for (std::size_t k = 0; k < err.size(); ++k) {
        if (err[k] > emax) {
            emax = err[k];
            r.worst_step = k;
        }
        rmax = std::max(rmax, ref[k]);
    }
    r.relative_error = rmax > 0.0 ? emax / rmax : emax;
    r.pass = std::isfinite(r.relative_error) && r.relative_error <= tol;
    return r;
}

} // namespace

OracleReport check_oracle_p(const Scenario& s, const BackwardPair1& pq, double tol)
{
    const auto oracle = deterministic_ptilde(s, pq.designs().xbar(), 0);
    const double h = s.grid.spacing();
    std::vector<double> err(oracle.size());
    std::vector<double> ref(oracle.size());
    RowMatrix pt;
    std::vector<RowMatrix> q;
    for (std::size_t k = 0; k < oracle.size(); ++k) {
        pq.evaluate(k, pt, q);
        err[k] = std::sqrt(h * (pt.row(0).transpose() - oracle[k]).squaredNorm());
        ref[k] = std::sqrt(h * oracle[k].squaredNorm());
    }
    return finish("oracle.p", err, ref, tol);
}

OracleReport check_oracle_P(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& PQ, double tol)
{
    const auto p = deterministic_ptilde(s, pq.designs().xbar(), 0);
    const auto oracle = deterministic_Ptilde(s, pq.designs().xbar(), p, PQ.terminal_kind(), 0);
    const double h = s.grid.spacing();
    std::vector<double> err(oracle.size());
    std::vector<double> ref(oracle.size());
    RowMatrix Pt;
    std::vector<RowMatrix> Q;
    for (std::size_t k = 0; k < oracle.size(); ++k) {
        PQ.evaluate(k, Pt, Q);
        err[k] = std::sqrt(h * h * (Pt.row(0).transpose() - oracle[k]).squaredNorm());
        ref[k] = std::sqrt(h * h * oracle[k].squaredNorm());
    }
    const bool limit = PQ.terminal_kind().kind == Terminal2::Kind::diagonal;
    return finish(limit ? "oracle.P.limit" : "oracle.P.mollified", err, ref, tol);
}

OracleReport check_oracle_affine(const Scenario& s, const BackwardPair1& pq, const ControlProcess& u, double tol)
{
    const AffineAdjoint ans = affine_adjoint(s, u);
    const StateHistory& xbar = pq.designs().xbar();
    double err = 0.0;
    double ref = 0.0;
    RowMatrix pt;
    std::vector<RowMatrix> q;
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        pq.evaluate(k, pt, q);
        const RowMatrix a = ans.ptilde(k, xbar.x[k]);
        err += (pt - a).squaredNorm();
        ref += a.squaredNorm();
    }
    // Common factors h, dt and 1/M cancel in the ratio.
    OracleReport r;
    r.id = "oracle.affine";
    r.tol = tol;
    r.relative_error = ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err);
    r.pass = std::isfinite(r.relative_error) && r.relative_error <= tol;
    return r;
}

} // namespace smplab
