#include "smplab/adjoint/adjoint.hpp"

#include <algorithm>
#include <cmath>

#include "smplab/error.hpp"
#include "smplab/numerics/trace.hpp"

namespace smplab {

namespace {

using StrideMap = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

StrideMap mode_column(const PathEnsemble& e, std::size_t k, std::size_t m)
{
    return StrideMap(e.step(k) + m, static_cast<Eigen::Index>(e.paths()),
                     Eigen::InnerStride<>(static_cast<Eigen::Index>(e.K())));
}

void check_shapes(const Scenario& s, const StateHistory& xbar, const PathEnsemble& e)
{
    if (e.n_t() != s.time.n_t || e.K() != s.K() || xbar.paths() != e.paths() || xbar.n_t() != s.time.n_t) {
        throw StructuralError("reference trajectory, ensemble and scenario do not match");
    }
}

RowMatrix terminal_map(const TerminalMap& f, const RowMatrix& x)
{
    RowMatrix out(x.rows(), x.cols());
    for (Eigen::Index p = 0; p < x.rows(); ++p) {
        for (Eigen::Index i = 0; i < x.cols(); ++i) {
            out(p, i) = f(x(p, i));
        }
    }
    return out;
}

// Regression targets (p - fit) dW^m / dt of the martingale part.
RowMatrix increment_target(const RowMatrix& resid, const PathEnsemble& e, std::size_t k, std::size_t m)
{
    const auto dw = mode_column(e, k, m);
    return (resid.array().colwise() * (dw.array() / e.dt())).matrix();
}

RegressionDiagnostics diag_entry(std::size_t k, std::string target, const StepDesign& d, double r2)
{
    return RegressionDiagnostics{k, std::move(target), d.condition(), r2, d.features()};
}

// Weighted Gram W = C diag(w) C^T of fit rows C in spectral coefficients;
// plain L2 on the square when w is null.
Eigen::MatrixXd weighted_rows_square(const RowMatrix& S, const SpectralBasis& basis, const Eigen::MatrixXd* w)
{
    const double h = basis.grid().spacing();
    if (w == nullptr) {
        return (h * h) * (S * S.transpose());
    }
    RowMatrix C = tensor_coefficient_rows(basis, S);
    const Eigen::Map<const Eigen::RowVectorXd> wr(w->data(), w->size()); // w is symmetric
    C.array().rowwise() *= wr.array().sqrt();
    return C * C.transpose();
}

} // namespace

DesignSet::DesignSet(const Scenario& s, const StateHistory& xbar, const RegressionBasis& basis) : xbar_(&xbar)
{
    if (xbar.n_t() != s.time.n_t || xbar.n() != s.n()) {
        throw StructuralError("reference trajectory does not match the scenario grid");
    }
    const SpectralBasis spectral(s.op);
    designs_.reserve(s.time.n_t);
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        designs_.emplace_back(basis, spectral, xbar.x[k]);
        designs_.back().release_design();
    }
}

RowMatrix DesignSet::X(std::size_t k) const
{
    return designs_.at(k).transform(xbar_->x.at(k));
}

std::string Terminal2::tag() const
{
    switch (kind) {
    case Kind::diagonal:
        return "limit";
    case Kind::zero:
        return "zero";
    case Kind::mollified:
        return "mollified";
    }
    return "mollified";
}

BackwardPair1 solve_adjoint1(const Scenario& s, const StateHistory& xbar, const PathEnsemble& e,
                             const RegressionBasis& basis)
{
    check_shapes(s, xbar, e);
    return solve_adjoint1(s, std::make_shared<const DesignSet>(s, xbar, basis), e);
}

BackwardPair1 solve_adjoint1(const Scenario& s, std::shared_ptr<const DesignSet> designs, const PathEnsemble& e)
{
    const StateHistory& xbar = designs->xbar();
    check_shapes(s, xbar, e);
    const std::size_t N = s.time.n_t;
    const std::size_t K = s.K();
    const double dt = s.dt();
    const auto& c = s.coeffs;
    const Resolvent1D R(s.op, dt);
    const Linearization lin(s, xbar);

    BackwardPair1 out;
    out.s_ = &s;
    out.designs_ = designs;
    out.seed_ = e.seed();
    out.paths_ = e.paths();
    out.ptilde_.resize(N);
    out.q_.assign(N, std::vector<LinearFit>(K));

    RowMatrix p = terminal_map(c.h_x, xbar.x[N]);
    check_finite(p, N, "first order adjoint");
    RowMatrix a;
    std::vector<RowMatrix> sx;
    RowMatrix lx;
    const auto solve = [&R](double* row) { R.solve(row); };
    for (std::size_t k = N; k-- > 0;) {
        const StepDesign& d = designs->at(k);
        const RowMatrix X = designs->X(k);
        double r2 = 0.0;
        LinearFit fp(d, X, p, &r2);
        out.diagnostics_.push_back(diag_entry(k, "p", d, r2));
        const RowMatrix resid = p - fp.evaluate(X);
        for (std::size_t m = 0; m < K; ++m) {
            LinearFit fq(d, X, increment_target(resid, e, k, m), &r2);
            out.diagnostics_.push_back(diag_entry(k, "q" + std::to_string(m), d, r2));
            fq.map_rows(solve);
            out.q_[k][m] = std::move(fq);
        }
        fp.map_rows(solve);
        out.ptilde_[k] = std::move(fp);

        const RowMatrix pt = out.ptilde_[k].evaluate(X);
        lin.first_order(k, a, sx);
        lin.drift(c.l_x, k, lin.reference(k), lx);
        RowMatrix next = pt + dt * (a.array() * pt.array()).matrix() + dt * lx;
        for (std::size_t m = 0; m < K; ++m) {
            if (sx[m].size() != 0) {
                next.array() += dt * sx[m].array() * out.q_[k][m].evaluate(X).array();
            }
        }
        check_finite(next, k, "first order adjoint");
        p.swap(next);
    }
    std::reverse(out.diagnostics_.begin(), out.diagnostics_.end());
    return out;
}

void BackwardPair1::evaluate(std::size_t k, RowMatrix& ptilde, std::vector<RowMatrix>& q) const
{
    const RowMatrix X = designs_->X(k);
    ptilde = ptilde_.at(k).evaluate(X);
    q.resize(q_.at(k).size());
    for (std::size_t m = 0; m < q.size(); ++m) {
        q[m] = q_[k][m].evaluate(X);
    }
}

RowMatrix BackwardPair1::p(std::size_t k) const
{
    const StateHistory& xbar = designs_->xbar();
    const auto& c = s_->coeffs;
    if (k == n_t()) {
        return terminal_map(c.h_x, xbar.x.at(k));
    }
    const Linearization lin(*s_, xbar);
    RowMatrix pt;
    std::vector<RowMatrix> q;
    evaluate(k, pt, q);
    RowMatrix a;
    std::vector<RowMatrix> sx;
    RowMatrix lx;
    lin.first_order(k, a, sx);
    lin.drift(c.l_x, k, lin.reference(k), lx);
    const double dt = s_->dt();
    RowMatrix out = pt + dt * (a.array() * pt.array()).matrix() + dt * lx;
    for (std::size_t m = 0; m < q.size(); ++m) {
        if (sx[m].size() != 0) {
            out.array() += dt * sx[m].array() * q[m].array();
        }
    }
    return out;
}

void pack_upper(const RowMatrix& full, std::size_t n, RowMatrix& packed)
{
    const auto nn = static_cast<Eigen::Index>(n);
    packed.resize(full.rows(), nn * (nn + 1) / 2);
    for (Eigen::Index p = 0; p < full.rows(); ++p) {
        Eigen::Index c = 0;
        for (Eigen::Index i = 0; i < nn; ++i) {
            for (Eigen::Index j = i; j < nn; ++j) {
                packed(p, c++) = full(p, i * nn + j);
            }
        }
    }
}

void unpack_upper(const RowMatrix& packed, std::size_t n, RowMatrix& full)
{
    const auto nn = static_cast<Eigen::Index>(n);
    if (packed.cols() != nn * (nn + 1) / 2) {
        throw StructuralError("packed width does not match the grid");
    }
    full.resize(packed.rows(), nn * nn);
    for (Eigen::Index p = 0; p < packed.rows(); ++p) {
        Eigen::Index c = 0;
        for (Eigen::Index i = 0; i < nn; ++i) {
            for (Eigen::Index j = i; j < nn; ++j) {
                const double v = packed(p, c++);
                full(p, i * nn + j) = v;
                full(p, j * nn + i) = v;
            }
        }
    }
}

RowMatrix BackwardPair2::terminal() const
{
    const StateHistory& xbar = designs_->xbar();
    const Grid1D& g = s_->grid;
    const auto n = static_cast<Eigen::Index>(g.size());
    const RowMatrix& xN = xbar.x.back();
    RowMatrix out = RowMatrix::Zero(xN.rows(), n * n);
    if (terminal_.kind == Terminal2::Kind::zero) {
        return out;
    }
    const RowMatrix w = terminal_map(s_->coeffs.h_xx, xN);
    if (terminal_.kind == Terminal2::Kind::diagonal) {
        const double ih = 1.0 / g.spacing();
        for (Eigen::Index p = 0; p < out.rows(); ++p) {
            for (Eigen::Index i = 0; i < n; ++i) {
                out(p, i * n + i) = w(p, i) * ih;
            }
        }
        return out;
    }
    // Kernel with unit weights; heat_mollifier validates eta and warns once.
    const TensorField kernel = heat_mollifier(Field(g, 1.0), terminal_.eta);
    for (Eigen::Index p = 0; p < out.rows(); ++p) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                out(p, i * n + j) = 0.5 * (w(p, i) + w(p, j)) *
                                    kernel(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }
    return out;
}

BackwardPair2 solve_adjoint2(const Scenario& s, const BackwardPair1& pq, const PathEnsemble& e,
                             const Terminal2& terminal)
{
    const DesignSet& designs = pq.designs();
    const StateHistory& xbar = designs.xbar();
    check_shapes(s, xbar, e);
    const std::size_t N = s.time.n_t;
    const std::size_t K = s.K();
    const std::size_t n = s.n();
    const auto nn = static_cast<Eigen::Index>(n);
    const double dt = s.dt();
    const double ih = 1.0 / s.grid.spacing();
    const auto& c = s.coeffs;
    const SpectralBasis basis(s.op);
    const Resolvent2D R2(basis, dt);
    const Linearization lin(s, xbar);

    BackwardPair2 out;
    out.s_ = &s;
    out.terminal_ = terminal;
    out.designs_ = pq.shared_designs();
    out.Ptilde_.resize(N);
    out.Q_.assign(N, std::vector<LinearFit>(K));

    RowMatrix P = out.terminal();
    RowMatrix packed;
    RowMatrix full;
    RowMatrix a2;
    std::vector<RowMatrix> s2;
    RowMatrix pt;
    std::vector<RowMatrix> q;
    RowMatrix f;
    RowMatrix tmp;
    const auto unpack_solve = [&](const LinearFit& fit) {
        unpack_upper(fit.stacked(), n, full);
        LinearFit sym = LinearFit::from_stacked(full);
        sym.map_rows([&R2](double* row) { R2.solve(row); });
        // The solve is symmetric only up to rounding; mirror the upper triangle.
        RowMatrix upper;
        pack_upper(sym.stacked(), n, upper);
        unpack_upper(upper, n, full);
        return LinearFit::from_stacked(full);
    };
    for (std::size_t k = N; k-- > 0;) {
        const StepDesign& d = designs.at(k);
        const RowMatrix X = designs.X(k);
        pack_upper(P, n, packed);
        double r2 = 0.0;
        const LinearFit fP(d, X, packed, &r2);
        out.diagnostics_.push_back(diag_entry(k, "P", d, r2));
        const RowMatrix resid = packed - fP.evaluate(X);
        for (std::size_t m = 0; m < K; ++m) {
            const LinearFit fQ(d, X, increment_target(resid, e, k, m), &r2);
            out.diagnostics_.push_back(diag_entry(k, "Q" + std::to_string(m), d, r2));
            out.Q_[k][m] = unpack_solve(fQ);
        }
        out.Ptilde_[k] = unpack_solve(fP);

        const RowMatrix Pt = out.Ptilde_[k].evaluate(X);
        lin.second_order(k, a2, s2);
        RowMatrix next = Pt + dt * (a2.array() * Pt.array()).matrix();
        for (std::size_t m = 0; m < K; ++m) {
            if (s2[m].size() != 0) {
                next.array() += dt * s2[m].array() * out.Q_[k][m].evaluate(X).array();
            }
        }
        // Diagonal source delta_star(l_xx + b_xx ptilde + sum sigma_xx q).
        pq.evaluate(k, pt, q);
        const ControlAt ub = lin.reference(k);
        lin.drift(c.l_xx, k, ub, f);
        lin.drift(c.b_xx, k, ub, tmp);
        f.array() += tmp.array() * pt.array();
        for (std::size_t m = 0; m < K; ++m) {
            lin.noise(c.sigma_xx, m, k, ub, tmp);
            f.array() += tmp.array() * q[m].array();
        }
        for (Eigen::Index p = 0; p < next.rows(); ++p) {
            for (Eigen::Index i = 0; i < nn; ++i) {
                next(p, i * nn + i) += dt * ih * f(p, i);
            }
        }
        check_finite(next, k, "second order adjoint");
        P.swap(next);
    }
    std::reverse(out.diagnostics_.begin(), out.diagnostics_.end());
    return out;
}

BackwardPair2 solve_adjoint2_mollified(const Scenario& s, const BackwardPair1& pq, const PathEnsemble& e,
                                       double eta)
{
    return solve_adjoint2(s, pq, e, Terminal2::mollified_at(eta));
}

void BackwardPair2::evaluate(std::size_t k, RowMatrix& Ptilde, std::vector<RowMatrix>& Q) const
{
    const RowMatrix X = designs_->X(k);
    Ptilde = Ptilde_.at(k).evaluate(X);
    Q.resize(Q_.at(k).size());
    for (std::size_t m = 0; m < Q.size(); ++m) {
        Q[m] = Q_[k][m].evaluate(X);
    }
}

Eigen::VectorXd tensor_row_norms_squared(const RowMatrix& rows, const SpectralBasis& basis, double gamma)
{
    const Eigen::MatrixXd w = tensor_weights(basis, gamma);
    const Eigen::Map<const Eigen::RowVectorXd> wr(w.data(), w.size());
    const RowMatrix C = tensor_coefficient_rows(basis, rows);
    return (C.array().square().rowwise() * wr.array()).rowwise().sum();
}

Adjoint2Norms adjoint2_norms(const BackwardPair2& PQ, const SpectralBasis& basis)
{
    const Scenario& s = PQ.scenario();
    const double dt = s.dt();
    const Eigen::MatrixXd w = tensor_weights(basis, -1.0);
    Adjoint2Norms out;
    out.sup_hminus1 = tensor_row_norms_squared(PQ.terminal(), basis, -1.0).mean();
    for (std::size_t k = 0; k < PQ.n_t(); ++k) {
        const Eigen::MatrixXd& G = PQ.designs().at(k).gram();
        const RowMatrix S = PQ.Ptilde_fit(k).stacked();
        out.sup_hminus1 = std::max(out.sup_hminus1, mean_square_from_rows(weighted_rows_square(S, basis, &w), G));
        out.l2_time += dt * mean_square_from_rows(weighted_rows_square(S, basis, nullptr), G);
        for (std::size_t m = 0; m < s.K(); ++m) {
            const RowMatrix Sq = PQ.Q_fit(k, m).stacked();
            out.q_hminus1_time += dt * mean_square_from_rows(weighted_rows_square(Sq, basis, &w), G);
        }
    }
    return out;
}

PairDistance adjoint2_distance(const BackwardPair2& a, const BackwardPair2& b, const SpectralBasis& basis)
{
    if (&a.designs() != &b.designs()) {
        throw StructuralError("pairs were solved on different designs");
    }
    const double dt = a.scenario().dt();
    const Eigen::MatrixXd w = tensor_weights(basis, -1.0);
    PairDistance out;
    out.sup_hminus1 = tensor_row_norms_squared(a.terminal() - b.terminal(), basis, -1.0).mean();
    double l2 = 0.0;
    for (std::size_t k = 0; k < a.n_t(); ++k) {
        const Eigen::MatrixXd& G = a.designs().at(k).gram();
        const RowMatrix S = a.Ptilde_fit(k).stacked() - b.Ptilde_fit(k).stacked();
        out.sup_hminus1 = std::max(out.sup_hminus1, mean_square_from_rows(weighted_rows_square(S, basis, &w), G));
        l2 += dt * mean_square_from_rows(weighted_rows_square(S, basis, nullptr), G);
    }
    out.l2 = std::sqrt(std::max(l2, 0.0));
    return out;
}

Limit2 solve_adjoint2_limit(const Scenario& s, const BackwardPair1& pq, const PathEnsemble& e,
                            const std::vector<double>& eta_ladder)
{
    if (eta_ladder.empty()) {
        throw DomainError("eta ladder is empty");
    }
    for (std::size_t i = 1; i < eta_ladder.size(); ++i) {
        if (!(eta_ladder[i] < eta_ladder[i - 1])) {
            throw DomainError("eta ladder must be strictly decreasing");
        }
    }
    const SpectralBasis basis(s.op);
    Limit2 out{solve_adjoint2(s, pq, e, Terminal2::diagonal()), CauchyReport{}};
    CauchyReport& rep = out.report;
    const RowMatrix diag = out.limit.terminal();
    std::vector<BackwardPair2> ladder;
    for (const double eta : eta_ladder) {
        ladder.push_back(solve_adjoint2(s, pq, e, Terminal2::mollified_at(eta)));
        const BackwardPair2& cur = ladder.back();
        rep.eta.push_back(eta);
        rep.apriori.push_back(adjoint2_norms(cur, basis).apriori());
        rep.terminal_distance.push_back(
            std::sqrt(tensor_row_norms_squared(cur.terminal() - diag, basis, -1.0).mean()));
        rep.distance_to_limit.push_back(adjoint2_distance(cur, out.limit, basis));
        if (ladder.size() >= 2) {
            rep.increments.push_back(adjoint2_distance(ladder[ladder.size() - 2], cur, basis));
        }
        // Only the previous pair is needed for the next increment.
        if (ladder.size() > 2) {
            ladder.erase(ladder.begin());
        }
    }
    for (std::size_t i = 1; i < rep.increments.size(); ++i) {
        if (!(rep.increments[i].l2 < rep.increments[i - 1].l2)) {
            rep.increments_decreasing = false;
        }
    }
    for (std::size_t i = 1; i < rep.terminal_distance.size(); ++i) {
        if (!(rep.terminal_distance[i] < rep.terminal_distance[i - 1])) {
            rep.terminal_decreasing = false;
        }
    }
    const double first = rep.apriori.front();
    for (const double v : rep.apriori) {
        if (v > 1.1 * first) {
            rep.apriori_bounded = false;
        }
    }
    rep.apriori_limit = adjoint2_norms(out.limit, basis).apriori();
    return out;
}

} // namespace smplab
