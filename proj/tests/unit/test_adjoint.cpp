#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "smplab/adjoint/adjoint.hpp"
#include "smplab/adjoint/oracle.hpp"
#include "smplab/error.hpp"
#include "smplab/forward/ensemble.hpp"
#include "smplab/forward/state.hpp"
#include "smplab/numerics/trace.hpp"
#include "smplab/scenario/scenario.hpp"

using namespace smplab;

namespace {

Scenario build(const std::string& text)
{
    std::istringstream in(text);
    return build_scenario(parse_config(in));
}

PathEnsemble ensemble_for(const Scenario& s, std::size_t paths)
{
    return PathEnsemble(s.seed, paths, s.time.n_t, s.K(), s.dt());
}

RegressionBasis basis_of(const Scenario& s) { return RegressionBasis{s.config.reg_linear, s.config.reg_quadratic}; }

RowMatrix random_states(std::mt19937_64& rng, Eigen::Index M, Eigen::Index n)
{
    std::normal_distribution<double> g;
    RowMatrix x(M, n);
    for (Eigen::Index p = 0; p < M; ++p) {
        for (Eigen::Index i = 0; i < n; ++i) {
            x(p, i) = g(rng);
        }
    }
    return x;
}

const char* const kZeroNoise = R"(
[grid]
n = 8
[coefficients]
drift = logistic-drift
s = 0
s_u = 0
x_target = 0.5
[time]
n_t = 16
[run]
paths = 400
reg_linear = 4
reg_quadratic = 2
)";

} // namespace

TEST_CASE("regression recovers an exactly linear target")
{
    const Scenario s = build("[grid]\nn = 6\n");
    const SpectralBasis spectral(s.op);
    std::mt19937_64 rng(1);
    const RowMatrix x = random_states(rng, 400, 6);
    const StepDesign d(RegressionBasis{4, 2}, spectral, x);
    CHECK(d.features() == 7);
    CHECK(d.condition() >= 1.0);
    // target: 3 + 2 c_1(x) - c_2(x) c_2(x), with c_j the spectral coefficients
    const RowMatrix c = std::sqrt(s.grid.spacing()) * (x * spectral.vectors());
    RowMatrix Y(400, 2);
    Y.col(0) = (3.0 + 2.0 * c.col(0).array() - c.col(1).array().square()).matrix();
    Y.col(1) = RowMatrix::Constant(400, 1, -1.5);
    double r2 = 0.0;
    const LinearFit fit(d, d.X(), Y, &r2);
    CHECK(fit.width() == 2);
    CHECK((fit.evaluate(d.X()) - Y).norm() <= 1e-9 * Y.norm());
    CHECK(r2 == doctest::Approx(1.0));
    CHECK((fit.evaluate(d.transform(x)) - Y).norm() <= 1e-9 * Y.norm());
    const LinearFit back = LinearFit::from_stacked(fit.stacked());
    CHECK(back.evaluate(d.X()) == fit.evaluate(d.X()));
}

TEST_CASE("regression fitted values are projections")
{
    const Scenario s = build("[grid]\nn = 6\n");
    const SpectralBasis spectral(s.op);
    std::mt19937_64 rng(2);
    const RowMatrix x = random_states(rng, 300, 6);
    const StepDesign d(RegressionBasis{3, 1}, spectral, x);
    const RowMatrix Y = random_states(rng, 300, 1);
    const LinearFit fit(d, d.X(), Y);
    const RowMatrix resid = Y - fit.evaluate(d.X());
    // residuals are orthogonal to the constant and to every feature
    CHECK(std::abs(resid.sum()) <= 1e-9 * Y.norm());
    CHECK((d.X().transpose() * resid).norm() <= 1e-9 * Y.norm() * std::sqrt(300.0));
    // Dense normal equations with an explicit intercept column.
    Eigen::MatrixXd Xa(300, d.features() + 1);
    Xa.col(0).setOnes();
    Xa.rightCols(static_cast<Eigen::Index>(d.features())) = d.X();
    const Eigen::VectorXd beta = Xa.colPivHouseholderQr().solve(Eigen::VectorXd(Y.col(0)));
    CHECK((Xa * beta - fit.evaluate(d.X()).col(0)).norm() <= 1e-9 * Y.norm());
}

TEST_CASE("mean square from rows agrees with the direct average")
{
    const Scenario s = build("[grid]\nn = 5\n");
    const SpectralBasis spectral(s.op);
    std::mt19937_64 rng(3);
    const RowMatrix x = random_states(rng, 200, 5);
    const StepDesign d(RegressionBasis{3, 1}, spectral, x);
    const RowMatrix Y = random_states(rng, 200, 5);
    const LinearFit fit(d, d.X(), Y);
    const RowMatrix S = fit.stacked();
    const double w = 0.3;
    const Eigen::MatrixXd W = w * S * S.transpose();
    const RowMatrix V = fit.evaluate(d.X());
    const double direct = w * V.rowwise().squaredNorm().mean();
    CHECK(mean_square_from_rows(W, d.gram()) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("regression refuses small samples and degenerate designs reduce to the mean")
{
    const Scenario s = build("[grid]\nn = 6\n");
    const SpectralBasis spectral(s.op);
    std::mt19937_64 rng(4);
    CHECK_THROWS_AS(StepDesign(RegressionBasis{4, 2}, spectral, random_states(rng, 100, 6)), RegressionError);

    // every path on the same ray: one linear feature survives the pruning
    const RowMatrix dir = random_states(rng, 1, 6);
    const RowMatrix amp = random_states(rng, 200, 1);
    const RowMatrix x = amp * dir;
    const StepDesign d(RegressionBasis{4, 0}, spectral, x);
    CHECK(d.features() == 1);

    const RowMatrix same = RowMatrix::Ones(200, 1) * dir;
    const StepDesign flat(RegressionBasis{4, 2}, spectral, same);
    CHECK(flat.features() == 0);
    const RowMatrix Y = random_states(rng, 200, 2);
    const LinearFit fit(flat, flat.X(), Y);
    const RowMatrix v = fit.evaluate(flat.X());
    CHECK(v(17, 0) == doctest::Approx(Y.col(0).mean()));
    CHECK(v(3, 1) == doctest::Approx(Y.col(1).mean()));
}

TEST_CASE("upper triangle packing round trip")
{
    std::mt19937_64 rng(5);
    const std::size_t n = 4;
    RowMatrix full = random_states(rng, 3, 16);
    for (Eigen::Index p = 0; p < 3; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                full(p, static_cast<Eigen::Index>(i * n + j)) = full(p, static_cast<Eigen::Index>(j * n + i));
            }
        }
    }
    RowMatrix packed;
    pack_upper(full, n, packed);
    CHECK(packed.cols() == 10);
    CHECK(packed(1, 1) == full(1, 1));
    RowMatrix back;
    unpack_upper(packed, n, back);
    CHECK(back == full);
}

TEST_CASE("tensor row norms with gamma 0 are L2 norms on the square")
{
    const Scenario s = build("[grid]\nn = 5\n");
    const SpectralBasis spectral(s.op);
    std::mt19937_64 rng(6);
    const RowMatrix rows = random_states(rng, 2, 25);
    const Eigen::VectorXd nrm = tensor_row_norms_squared(rows, spectral, 0.0);
    const double h = s.grid.spacing();
    CHECK(nrm[0] == doctest::Approx(h * h * rows.row(0).squaredNorm()));
    CHECK(nrm[1] == doctest::Approx(h * h * rows.row(1).squaredNorm()));
}

TEST_CASE("first order adjoint equals the dense sweep without noise")
{
    const Scenario s = build(kZeroNoise);
    const PathEnsemble e = ensemble_for(s, s.config.paths);
    const auto xbar = simulate_state(s, s.reference, e);
    const auto pq = solve_adjoint1(s, xbar, e, basis_of(s));
    const auto ref = deterministic_ptilde(s, xbar);
    REQUIRE(ref.size() == s.time.n_t);
    RowMatrix pt;
    std::vector<RowMatrix> q;
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        pq.evaluate(k, pt, q);
        const Eigen::VectorXd got = pt.row(0).transpose();
        CHECK((got - ref[k]).norm() <= 1e-10 * (1.0 + ref[k].norm()));
        CHECK(q.at(0).norm() <= 1e-10);
        // all paths coincide
        CHECK((pt.row(0) - pt.row(7)).norm() == doctest::Approx(0.0));
    }
    // p_N = h_x(xbar_N) = x - 0.5
    const RowMatrix pN = pq.p(s.time.n_t);
    CHECK(pN(0, 3) == doctest::Approx(xbar.x.back()(0, 3) - 0.5));
}

TEST_CASE("second order adjoint equals the dense sweep without noise")
{
    const Scenario s = build(kZeroNoise);
    const PathEnsemble e = ensemble_for(s, s.config.paths);
    const auto xbar = simulate_state(s, s.reference, e);
    const auto pq = solve_adjoint1(s, xbar, e, basis_of(s));
    const auto ptilde = deterministic_ptilde(s, xbar);
    for (const Terminal2 term : {Terminal2::diagonal(), Terminal2::mollified_at(s.eta())}) {
        const auto PQ = solve_adjoint2(s, pq, e, term);
        const auto ref = deterministic_Ptilde(s, xbar, ptilde, term);
        RowMatrix Pt;
        std::vector<RowMatrix> Q;
        for (std::size_t k = 0; k < s.time.n_t; k += 5) {
            PQ.evaluate(k, Pt, Q);
            const Eigen::VectorXd got = Pt.row(0).transpose();
            CHECK((got - ref[k]).norm() <= 1e-10 * (1.0 + ref[k].norm()));
        }
    }
}

TEST_CASE("second order fits are symmetric and the terminal data is delta_star of h_xx")
{
    const Scenario s = build(R"(
[grid]
n = 6
[time]
n_t = 8
[run]
paths = 400
reg_linear = 4
reg_quadratic = 2
)");
    const PathEnsemble e = ensemble_for(s, s.config.paths);
    const auto xbar = simulate_state(s, s.reference, e);
    const auto pq = solve_adjoint1(s, xbar, e, basis_of(s));
    const auto PQ = solve_adjoint2(s, pq, e, Terminal2::diagonal());
    CHECK(PQ.tag() == "limit");
    const std::size_t n = s.n();
    RowMatrix Pt;
    std::vector<RowMatrix> Q;
    PQ.evaluate(3, Pt, Q);
    const RowMatrix Sp = PQ.Ptilde_fit(3).stacked();
    const RowMatrix Sq = PQ.Q_fit(3, 0).stacked();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto ij = static_cast<Eigen::Index>(i * n + j);
            const auto ji = static_cast<Eigen::Index>(j * n + i);
            CHECK(Sp.col(ij) == Sp.col(ji));
            CHECK(Sq.col(ij) == Sq.col(ji));
            CHECK(Pt(5, ij) == doctest::Approx(Pt(5, ji)).epsilon(1e-14));
        }
    }
    // quadratic terminal cost with w_T = 1: diagonal 1/h, zero elsewhere
    const RowMatrix PN = PQ.terminal();
    const double h = s.grid.spacing();
    CHECK(PN(0, 0) == doctest::Approx(1.0 / h));
    CHECK(PN(0, 1) == 0.0);
    CHECK(PN(2, static_cast<Eigen::Index>(n + 1)) == doctest::Approx(1.0 / h));

    const auto mol = solve_adjoint2_mollified(s, pq, e, s.eta());
    CHECK(mol.tag() == "mollified");
    CHECK(Terminal2{Terminal2::Kind::zero, 0.0}.tag() == "zero");
}

TEST_CASE("affine ansatz matches the regression adjoint")
{
    const Scenario s = build(R"(
[grid]
n = 8
[coefficients]
drift = additive
x_target = 0.5
[time]
n_t = 16
[run]
paths = 2000
reg_linear = 8
reg_quadratic = 0
)");
    const PathEnsemble e = ensemble_for(s, s.config.paths);
    const auto xbar = simulate_state(s, s.reference, e);
    const auto pq = solve_adjoint1(s, xbar, e, basis_of(s));
    const AffineAdjoint aff = affine_adjoint(s, s.reference);
    double num = 0.0;
    double den = 0.0;
    RowMatrix pt;
    std::vector<RowMatrix> q;
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        pq.evaluate(k, pt, q);
        const RowMatrix ansatz = aff.ptilde(k, xbar.x[k]);
        num += (pt - ansatz).squaredNorm();
        den += ansatz.squaredNorm();
    }
    // linear features span the ansatz, so only the conditional-mean noise remains
    CHECK(std::sqrt(num / den) < 0.02);
}

TEST_CASE("oracles refuse scenarios outside their assumptions")
{
    const Scenario noisy = build("[grid]\nn = 6\n[time]\nn_t = 8\n");
    const PathEnsemble e = ensemble_for(noisy, 10);
    const auto xbar = simulate_state(noisy, noisy.reference, e);
    try {
        deterministic_ptilde(noisy, xbar);
        FAIL("expected a validation error");
    } catch (const ValidationError& err) {
        CHECK(err.invariant() == "oracle.zero_noise");
    }
    const Scenario logistic = build("[coefficients]\ndrift = logistic-drift\n");
    try {
        affine_adjoint(logistic, logistic.reference);
        FAIL("expected a validation error");
    } catch (const ValidationError& err) {
        CHECK(err.invariant() == "oracle.affine");
    }
}

TEST_CASE("dense operator matches the oracle Laplacian")
{
    const Scenario s = build("[grid]\nn = 7\n");
    const Eigen::MatrixXd A = dense_operator(s.op);
    CHECK((A - oracle::laplacian_matrix(7, s.grid.spacing())).norm() <= 1e-10 * A.norm());
}
