#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "smplab/error.hpp"
#include "smplab/forward/cost.hpp"
#include "smplab/forward/ensemble.hpp"
#include "smplab/forward/expansion.hpp"
#include "smplab/forward/linear.hpp"
#include "smplab/forward/state.hpp"
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

// Dense one-path Euler-Maruyama written from the scheme definition.
Eigen::VectorXd dense_euler(const Scenario& s, const PathEnsemble& e, std::size_t path, const ControlProcess& u)
{
    const std::size_t n = s.n();
    const double h = s.grid.spacing();
    const double dt = s.dt();
    const Eigen::MatrixXd A = oracle::laplacian_matrix(n, h);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) - dt * A;
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(s.x0.values().data(), n);
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        std::vector<double> state(x.data(), x.data() + n);
        const ControlPoint uk = u.evaluate(k, state, s.grid);
        Eigen::VectorXd rhs = x;
        for (std::size_t i = 0; i < n; ++i) {
            rhs[i] += dt * s.coeffs.b(x[i], uk);
            for (std::size_t m = 0; m < s.K(); ++m) {
                rhs[i] += s.coeffs.sigma(x[i], uk, m) * s.noise.profile(m, i) * e.dW(k, path, m);
            }
        }
        x = B.partialPivLu().solve(rhs);
    }
    return x;
}

} // namespace

TEST_CASE("ensemble increments are addressable and reproducible")
{
    const PathEnsemble a(11, 50, 8, 2, 0.25);
    const PathEnsemble b(11, 50, 8, 2, 0.25);
    const PathEnsemble c(12, 50, 8, 2, 0.25);
    bool differs = false;
    for (std::size_t k = 0; k < 8; ++k) {
        for (std::size_t p = 0; p < 50; ++p) {
            for (std::size_t m = 0; m < 2; ++m) {
                CHECK(a.dW(k, p, m) == b.dW(k, p, m));
                CHECK(a.dW(k, p, m) == doctest::Approx(0.5 * PathEnsemble::standard_normal(11, p, k, m)));
                differs = differs || a.dW(k, p, m) != c.dW(k, p, m);
            }
        }
    }
    CHECK(differs);
    // A smaller ensemble is a prefix of a larger one.
    const PathEnsemble small(11, 5, 8, 2, 0.25);
    CHECK(small.dW(7, 4, 1) == a.dW(7, 4, 1));
    const PathEnsemble z = a.zeroed();
    CHECK(z.dW(3, 3, 1) == 0.0);
}

TEST_CASE("standard normal draws have unit variance")
{
    const std::size_t N = 200000;
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double g = PathEnsemble::standard_normal(5, i, 0, 0);
        sum += g;
        sq += g * g;
    }
    const double mean = sum / N;
    CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(N)));
    CHECK(sq / N == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("state scheme matches a dense Euler oracle")
{
    const Scenario s = build(R"(
[grid]
n = 10
[coefficients]
drift = logistic-drift
[noise]
K = 3
shapes = sine
[time]
n_t = 20
[run]
seed = 9
x0_amp = 0.5
)");
    const PathEnsemble e = ensemble_for(s, 6);
    const StateHistory hist = simulate_state(s, s.reference, e);
    REQUIRE(hist.n_t() == 20);
    REQUIRE(hist.paths() == 6);
    for (std::size_t p = 0; p < 6; ++p) {
        const Eigen::VectorXd ref = dense_euler(s, e, p, s.reference);
        const Field got = hist.field(s.grid, 20, p);
        for (std::size_t i = 0; i < s.n(); ++i) {
            CHECK(got[i] == doctest::Approx(ref[static_cast<Eigen::Index>(i)]).epsilon(1e-10));
        }
    }
}

TEST_CASE("feedback controls are applied per path")
{
    const Scenario s = build(R"(
[grid]
n = 8
[controls]
reference = feedback
feedback_edges = 0.5
reference_values = -1, 1
[time]
n_t = 16
[run]
x0_amp = 0.9
)");
    const PathEnsemble e = ensemble_for(s, 4);
    const StateHistory hist = simulate_state(s, s.reference, e);
    CHECK(hist.u.per_path());
    for (std::size_t p = 0; p < 4; ++p) {
        const Eigen::VectorXd ref = dense_euler(s, e, p, s.reference);
        const Field got = hist.field(s.grid, 16, p);
        for (std::size_t i = 0; i < s.n(); ++i) {
            CHECK(got[i] == doctest::Approx(ref[static_cast<Eigen::Index>(i)]).epsilon(1e-10));
        }
    }
}

TEST_CASE("zero noise reduces every path to the deterministic scheme")
{
    const Scenario s = build("[grid]\nn = 8\n[time]\nn_t = 16\n");
    const PathEnsemble e = ensemble_for(s, 5).zeroed();
    const StateHistory hist = simulate_state(s, s.reference, e);
    for (std::size_t p = 1; p < 5; ++p) {
        CHECK((hist.x[16].row(static_cast<Eigen::Index>(p)) - hist.x[16].row(0)).norm() == 0.0);
    }
    const Estimate J = cost(s, hist);
    CHECK(J.se == doctest::Approx(0.0));
}

TEST_CASE("simulation is deterministic in the seed")
{
    const Scenario s = build("[grid]\nn = 8\n[time]\nn_t = 16\n");
    const auto a = simulate_state(s, s.reference, ensemble_for(s, 20));
    const auto b = simulate_state(s, s.reference, ensemble_for(s, 20));
    CHECK(a.x.back() == b.x.back());
}

TEST_CASE("mismatched shapes are structural errors")
{
    const Scenario s = build("[grid]\nn = 8\n[time]\nn_t = 16\n");
    CHECK_THROWS_AS(simulate_state(s, s.reference, PathEnsemble(1, 3, 8, 1, s.dt())), StructuralError);
    CHECK_THROWS_AS(simulate_state(s, ControlProcess::constant(ControlPoint(1.0), 8), ensemble_for(s, 3)),
                    StructuralError);
    const auto xbar = simulate_state(s, s.reference, ensemble_for(s, 3));
    CHECK_THROWS_AS(simulate_perturbed(s, xbar, s.reference, ensemble_for(s, 3)), StructuralError);
}

TEST_CASE("explosive drift raises BlowUpError with the step")
{
    const Scenario s = build("[coefficients]\nbeta = 1e8\n[time]\nn_t = 64\n");
    try {
        simulate_state(s, s.reference, ensemble_for(s, 2));
        FAIL("expected a blow-up");
    } catch (const BlowUpError& e) {
        CHECK(e.step() > 1);
        CHECK(e.step() <= 64);
    }
}

TEST_CASE("nodal quadrature integrates constants exactly")
{
    const Grid1D g(0.0, 2.0, 7);
    const std::vector<double> ones(7, 3.0);
    CHECK(integrate_nodal(ones, 3.0, g.spacing()) == doctest::Approx(6.0));
}

TEST_CASE("cost of constant running and terminal costs")
{
    const Scenario s = build(R"(
[grid]
n = 8
b = 2
[coefficients]
cost = constant
c_l = 2
c_h = 3
[time]
T = 1.5
n_t = 16
)");
    const auto hist = simulate_state(s, s.reference, ensemble_for(s, 10));
    const Estimate J = cost(s, hist);
    CHECK(J.mean == doctest::Approx(1.5 * 2.0 * 2.0 + 2.0 * 3.0));
    CHECK(J.se == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(J.count == 10);
}

TEST_CASE("quadratic cost matches a hand-written quadrature")
{
    const Scenario s = build(R"(
[grid]
n = 6
[coefficients]
x_target = 0.5
x_ref = 0.25
r = 0.3
[time]
n_t = 8
)");
    const auto hist = simulate_state(s, s.reference, ensemble_for(s, 3));
    const auto costs = path_costs(s, hist);
    const double h = s.grid.spacing();
    const double dt = s.dt();
    for (std::size_t p = 0; p < 3; ++p) {
        double total = 0.0;
        for (std::size_t k = 0; k < 8; ++k) {
            // boundary nodes carry x = 0 at half weight each
            double integral = h * (0.5 * 0.0625 + 0.3);
            for (std::size_t i = 0; i < 6; ++i) {
                const double x = hist.x[k](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i));
                integral += h * (0.5 * (x - 0.25) * (x - 0.25) + 0.3);
            }
            total += dt * integral;
        }
        double terminal = h * 0.5 * 0.25;
        for (std::size_t i = 0; i < 6; ++i) {
            const double x = hist.x[8](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i));
            terminal += h * 0.5 * (x - 0.5) * (x - 0.5);
        }
        CHECK(costs[p] == doctest::Approx(total + terminal).epsilon(1e-12));
    }
}

TEST_CASE("linear solver matches the dense recursion")
{
    const Scenario s = build("[grid]\nn = 7\n[time]\nn_t = 10\n");
    const PathEnsemble e = ensemble_for(s, 3);
    const auto n = static_cast<Eigen::Index>(s.n());
    const double dt = s.dt();
    const auto hist = simulate_linear_history(s, e, [&](std::size_t k, const RowMatrix&, LinearStep& st) {
        st.a = RowMatrix::Constant(3, n, -0.5);
        st.phi = RowMatrix::Constant(3, n, 1.0 + static_cast<double>(k));
        st.s.assign(1, RowMatrix::Constant(3, n, 0.2));
        st.psi.assign(1, RowMatrix::Constant(3, n, 0.1));
    });
    REQUIRE(hist.size() == 11);
    const Eigen::MatrixXd A = oracle::laplacian_matrix(s.n(), s.grid.spacing());
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) - dt * A;
    for (std::size_t p = 0; p < 3; ++p) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < 10; ++k) {
            const double dw = e.dW(k, p, 0);
            Eigen::VectorXd rhs = y + dt * (-0.5 * y + Eigen::VectorXd::Constant(n, 1.0 + static_cast<double>(k))) +
                                  (0.2 * y + Eigen::VectorXd::Constant(n, 0.1)) * dw;
            y = B.partialPivLu().solve(rhs);
        }
        const Eigen::VectorXd got = hist[10].row(static_cast<Eigen::Index>(p)).transpose();
        CHECK((got - y).norm() <= 1e-10 * y.norm());
    }
}

TEST_CASE("linear tensor solver matches the Kronecker-sum recursion")
{
    const Scenario s = build("[grid]\nn = 5\n[time]\nn_t = 6\n");
    const PathEnsemble e = ensemble_for(s, 2);
    const auto n = static_cast<Eigen::Index>(s.n());
    const double dt = s.dt();
    std::mt19937_64 rng(4);
    const auto src = oracle::random_vector(rng, static_cast<std::size_t>(n * n));
    RowMatrix phi(2, n * n);
    for (Eigen::Index j = 0; j < n * n; ++j) {
        phi(0, j) = src[static_cast<std::size_t>(j)];
        phi(1, j) = -src[static_cast<std::size_t>(j)];
    }
    RowMatrix last;
    simulate_linear_tensor(s, e, [&](std::size_t, const RowMatrix&, LinearStep& st) { st.phi = phi; },
                           [&](std::size_t k, const RowMatrix& y) {
                               if (k == 6) {
                                   last = y;
                               }
                           });
    const Eigen::MatrixXd A2 = oracle::kron_sum(oracle::laplacian_matrix(s.n(), s.grid.spacing()));
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n * n, n * n) - dt * A2;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n * n);
    const Eigen::VectorXd f = phi.row(0).transpose();
    for (int k = 0; k < 6; ++k) {
        y = B.partialPivLu().solve(y + dt * f);
    }
    CHECK((last.row(0).transpose() - y).norm() <= 1e-10 * y.norm());
    CHECK((last.row(1).transpose() + y).norm() <= 1e-10 * y.norm());
}

TEST_CASE("outer products and row norms")
{
    RowMatrix a(2, 3);
    a << 1, 2, 3, -1, 0, 2;
    RowMatrix b(2, 3);
    b << 0.5, 1, -1, 2, 2, 2;
    RowMatrix out;
    outer_rows(a, b, out);
    REQUIRE(out.rows() == 2);
    REQUIRE(out.cols() == 9);
    for (Eigen::Index p = 0; p < 2; ++p) {
        for (Eigen::Index i = 0; i < 3; ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) {
                CHECK(out(p, i * 3 + j) == a(p, i) * b(p, j));
            }
        }
    }
    const Eigen::VectorXd r = row_norms_squared(a, 0.5);
    CHECK(r[0] == doctest::Approx(7.0));
    CHECK(r[1] == doctest::Approx(2.5));
}

TEST_CASE("expansion residual vanishes for additive dynamics")
{
    // b linear in x and sigma free of x: the first variation is exact.
    const Scenario s = build(R"(
[grid]
n = 8
[coefficients]
drift = additive
[controls]
spike_v = -1
[time]
n_t = 32
)");
    const PathEnsemble e = ensemble_for(s, 50);
    const auto xbar = simulate_state(s, s.reference, e);
    const auto st = expansion_statistics(s, xbar, s.spiked(0.125), e);
    CHECK(st.y_moment.mean > 1e-4);
    CHECK(st.residual.mean <= 1e-24);
}

TEST_CASE("perturbed state uses the spike value on its window only")
{
    const Scenario s = build("[grid]\nn = 8\n[controls]\nspike_v = -1\n[time]\nn_t = 16\n");
    const PathEnsemble e = ensemble_for(s, 4);
    const auto xbar = simulate_state(s, s.reference, e);
    const auto spike = s.spiked(0.125);
    const auto xeps = simulate_perturbed(s, xbar, spike, e);
    for (std::size_t k = 0; k < 16; ++k) {
        CHECK(xeps.u.at(k, 0)[0] == (spike.spike_active(k) ? -1.0 : 1.0));
    }
    // identical before the window opens
    CHECK(xeps.x[8] == xbar.x[8]);
    CHECK_FALSE(xeps.x[16] == xbar.x[16]);
}

TEST_CASE("trajectory dump round trip")
{
    const std::vector<std::vector<double>> steps{{1.0, 2.0}, {3.0, -4.5}, {0.0, 1e-300}};
    const std::vector<ControlPoint> controls{ControlPoint(1.0), ControlPoint(-1.0)};
    std::stringstream buf;
    write_trajectory(buf, steps, 2, 3, false, controls);
    const TrajectoryDump d = read_trajectory(buf);
    CHECK(d.n == 2);
    CHECK(d.n_t == 2);
    CHECK(d.K == 3);
    CHECK_FALSE(d.tensor);
    CHECK(d.steps == steps);
    REQUIRE(d.controls.size() == 2);
    CHECK(d.controls[1][0] == -1.0);

    std::stringstream bad("NOTATRAJ");
    CHECK_THROWS(read_trajectory(bad));
}
