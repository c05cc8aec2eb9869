#include <doctest.h>

#include <cmath>
#include <sstream>

#include "smplab/adjoint/adjoint.hpp"
#include "smplab/error.hpp"
#include "smplab/forward/cost.hpp"
#include "smplab/forward/ensemble.hpp"
#include "smplab/forward/state.hpp"
#include "smplab/scenario/scenario.hpp"
#include "smplab/verification/duality.hpp"
#include "smplab/verification/oracle_check.hpp"
#include "smplab/verification/rates.hpp"
#include "smplab/verification/report.hpp"
#include "smplab/verification/smp.hpp"

using namespace smplab;

namespace {

Scenario build(const std::string& text)
{
    std::istringstream in(text);
    return build_scenario(parse_config(in));
}

Scenario fixture(const std::string& name) { return load_scenario(std::string(SMPLAB_FIXTURES) + "/" + name); }

PathEnsemble ensemble_for(const Scenario& s) { return PathEnsemble(s.seed, s.config.paths, s.time.n_t, s.K(), s.dt()); }

RegressionBasis basis_of(const Scenario& s) { return RegressionBasis{s.config.reg_linear, s.config.reg_quadratic}; }

const char* const kSmall = R"(
[grid]
n = 8
[coefficients]
drift = logistic-drift
x_target = 0.5
[controls]
spike_v = -1
[time]
n_t = 16
[run]
paths = 1000
reg_linear = 6
reg_quadratic = 2
)";

const char* const kZeroNoise = R"(
[grid]
n = 8
[coefficients]
drift = logistic-drift
s = 0
s_u = 0
x_target = 0.5
[controls]
spike_v = -1
[time]
n_t = 16
[run]
paths = 400
reg_linear = 4
reg_quadratic = 2
)";

// Reference pair shared by several cases.
struct Pairs {
    Scenario s;
    PathEnsemble e;
    StateHistory xbar;
    BackwardPair1 pq;
    BackwardPair2 PQ;

    explicit Pairs(const char* text)
        : s(build(text)), e(ensemble_for(s)), xbar(simulate_state(s, s.reference, e)),
          pq(solve_adjoint1(s, xbar, e, basis_of(s))), PQ(solve_adjoint2(s, pq, e, Terminal2::diagonal()))
    {
    }
};

} // namespace

TEST_CASE("duality report arithmetic")
{
    const std::vector<double> lhs{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> rhs{1.0, 2.0, 3.0, 4.2};
    const auto r = make_report("d", "p", lhs, rhs, true, 0.05);
    CHECK(r.lhs.mean == doctest::Approx(2.5));
    CHECK(r.rhs.mean == doctest::Approx(2.55));
    CHECK(r.diff.mean == doctest::Approx(-0.05));
    // paired se: sd of (0,0,0,-0.2) / sqrt(4)
    CHECK(r.diff.se == doctest::Approx(0.05));
    CHECK(r.relative_gap == doctest::Approx(0.05 / 2.55));
    CHECK(r.pass == (0.05 + 2.0 * r.diff.se <= 0.05 * 2.55));
    CHECK(r.paths == 4);

    const std::vector<double> zeros(5, 0.0);
    const auto z = make_report("z", "zero", zeros, zeros, true, 0.05);
    CHECK(z.pass);
    CHECK(z.relative_gap == 0.0);
    CHECK_FALSE(make_report("z", "zero", zeros, zeros, false, 0.05).pass);
    CHECK_FALSE(make_report("d", "p", lhs, lhs, false, 0.05).pass);
}

TEST_CASE("zero probes give zero on both sides")
{
    Pairs f(kSmall);
    const auto r1 = check_duality1(f.s, f.pq, f.e, zero_probe1());
    CHECK(r1.lhs.mean == 0.0);
    CHECK(r1.rhs.mean == 0.0);
    CHECK(r1.pass);
    const auto r2 = check_duality2(f.s, f.pq, f.PQ, f.e, zero_probe2());
    CHECK(r2.rhs.mean == 0.0);
    CHECK(r2.pass);
}

TEST_CASE("duality is exact without noise")
{
    // sigma vanishes, so with psi removed nothing in y is random and the
    // regression reduces to the plain mean.
    Pairs f(kZeroNoise);
    for (auto probe : random_probes1(f.s, 3, 17)) {
        const auto fill = probe.fill;
        probe.fill = [fill](std::size_t k, const RowMatrix& x, RowMatrix& phi, std::vector<RowMatrix>& psi) {
            fill(k, x, phi, psi);
            psi.clear();
        };
        const auto r = check_duality1(f.s, f.pq, f.e, probe);
        CHECK(r.crn);
        CHECK(std::abs(r.rhs.mean) > 0.0);
        CHECK(r.relative_gap <= 1e-10);
        CHECK(r.pass);
    }
    for (auto probe : random_probes2(f.s, 2, 17)) {
        const auto fill = probe.fill;
        probe.fill = [fill](std::size_t k, const RowMatrix& x, RowMatrix& Phi, std::vector<RowMatrix>& Psi) {
            fill(k, x, Phi, Psi);
            Psi.clear();
        };
        const auto r = check_duality2(f.s, f.pq, f.PQ, f.e, probe);
        CHECK(r.relative_gap <= 1e-10);
    }
    const auto t = check_spike_duality2(f.s, f.pq, f.PQ, f.e, f.s.spiked(0.125), true, 0.1);
    CHECK(t.relative_gap <= 1e-10);
}

TEST_CASE("the quadratic representation converges in the time step")
{
    // y (x) y differs from the tensor scheme by O(dt) terms, so only the
    // tensor identity is exact on a fixed grid.
    std::string text = kZeroNoise;
    double previous = 1e300;
    for (const char* nt : {"16", "64", "256"}) {
        const auto pos = text.find("n_t = ");
        text.replace(pos, text.find('\n', pos) - pos, std::string("n_t = ") + nt);
        Pairs f(text.c_str());
        const auto q = check_limit_duality2(f.s, f.pq, f.PQ, f.e, f.s.spiked(0.125));
        CHECK(q.relative_gap < previous / 3.0);
        previous = q.relative_gap;
    }
    CHECK(previous < 0.05);
}

TEST_CASE("first order duality holds on a noisy problem")
{
    Pairs f(kSmall);
    for (const auto& probe : random_probes1(f.s, 3, 5)) {
        const auto r = check_duality1(f.s, f.pq, f.e, probe);
        CHECK(r.relative_gap < 0.05);
    }
}

TEST_CASE("a different ensemble is flagged as not on common noise")
{
    Pairs f(kSmall);
    const PathEnsemble other(f.s.seed + 1, f.s.config.paths, f.s.time.n_t, f.s.K(), f.s.dt());
    const auto r = check_duality1(f.s, f.pq, other, random_probes1(f.s, 1, 5).front());
    CHECK_FALSE(r.crn);
    CHECK_FALSE(r.pass);
}

TEST_CASE("random tensor probes are symmetric")
{
    Pairs f(kSmall);
    const std::size_t n = f.s.n();
    for (const auto& probe : random_probes2(f.s, 3, 2)) {
        RowMatrix Phi;
        std::vector<RowMatrix> Psi;
        probe.fill(4, f.xbar.x[4], Phi, Psi);
        REQUIRE(Phi.cols() == static_cast<Eigen::Index>(n * n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(Phi(0, static_cast<Eigen::Index>(i * n + j)) ==
                      doctest::Approx(Phi(0, static_cast<Eigen::Index>(j * n + i))));
            }
        }
        // positive semidefinite as an n x n matrix
        const Eigen::MatrixXd m = Eigen::Map<const Eigen::MatrixXd>(Phi.row(0).data(), n, n);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
        CHECK(eig.eigenvalues().minCoeff() >= -1e-12 * eig.eigenvalues().cwiseAbs().maxCoeff());
    }
}

TEST_CASE("hamiltonian of simple arguments")
{
    const Scenario s = build(R"(
[grid]
n = 6
b = 7
[coefficients]
drift = additive
cost = constant
c_l = 2
[noise]
K = 2
)");
    const Field x(s.grid, 0.0);
    const Field zero(s.grid, 0.0);
    const Field one(s.grid, 1.0);
    const ControlPoint u(0.5);
    const double h = s.grid.spacing();
    // int l = 2 |Lambda|
    CHECK(hamiltonian(s, x, u, zero, {zero, zero}) == doctest::Approx(14.0));
    // <1, kappa u> = n h kappa u
    CHECK(hamiltonian(s, x, u, one, {zero, zero}) == doctest::Approx(14.0 + 6 * h * 0.5));
    // sigma_m = (s0 + s1 u) / (m + 1) on flat profiles
    const double sig = 0.3 + 0.2 * 0.5;
    CHECK(hamiltonian(s, x, u, zero, {one, one}) == doctest::Approx(14.0 + 6 * h * (sig + sig / 2)));
    CHECK_THROWS_AS(hamiltonian(s, x, u, zero, {zero}), StructuralError);
}

TEST_CASE("the gap vanishes at the reference control")
{
    Pairs f(kSmall);
    for (const std::size_t k : smp_sample_steps(f.s.time.n_t, 4)) {
        const auto g = smp_gap(f.s, k, f.xbar.u.at(k, 0), f.pq, f.PQ);
        CHECK(g.cwiseAbs().maxCoeff() == 0.0);
        const auto other = smp_gap(f.s, k, ControlPoint(-1.0), f.pq, f.PQ);
        CHECK(other.cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("sample steps are block midpoints")
{
    const auto st = smp_sample_steps(64, 8);
    REQUIRE(st.size() == 8);
    CHECK(st.front() == 4);
    CHECK(st.back() == 60);
    for (std::size_t i = 1; i < st.size(); ++i) {
        CHECK(st[i] - st[i - 1] == 8);
    }
}

TEST_CASE("smp report scale and verdict")
{
    Pairs f(kSmall);
    const auto r = smp_report(f.s, f.pq, f.PQ, f.s.controls.lattice(), smp_sample_steps(f.s.time.n_t, 4));
    CHECK(r.samples.size() == 8);
    double worst = 0.0;
    double scale = 0.0;
    for (const auto& smp : r.samples) {
        worst = std::min(worst, smp.gap.mean);
        scale = std::max(scale, std::abs(smp.gap.mean));
        CHECK(smp.p05 <= smp.gap.mean);
    }
    CHECK(r.min_mean == doctest::Approx(worst));
    CHECK(r.scale == doctest::Approx(scale));
    CHECK(r.pass == (r.min_mean >= -r.tol * r.scale));
    const Verdict v = verdict_of(r, "smp.necessary");
    CHECK(v.id == "smp.necessary");
    CHECK(v.pass == r.pass);
}

TEST_CASE("paired cost difference of a control with itself is zero")
{
    const Scenario s = build(kSmall);
    const PathEnsemble e = ensemble_for(s);
    const auto d = cost_difference(s, e, s.reference, s.reference);
    CHECK(d.mean == 0.0);
    CHECK(d.se == 0.0);
}

TEST_CASE("brute force enumerates every block control on one ensemble")
{
    const Scenario s = build(R"(
[grid]
n = 6
[coefficients]
x_target = 1
[time]
n_t = 8
[run]
paths = 200
)");
    const PathEnsemble e = ensemble_for(s);
    const auto bf = brute_force_search(s, e, 2);
    REQUIRE(bf.table.size() == 4);
    CHECK(bf.blocks == 2);
    double best = 1e300;
    for (const auto& c : bf.table) {
        const auto hist = simulate_state(s, ControlProcess::blocks(c.blocks, 8), e);
        CHECK(cost(s, hist).mean == doctest::Approx(c.J.mean).epsilon(1e-12));
        best = std::min(best, c.J.mean);
    }
    CHECK(bf.table[bf.argmin].J.mean == best);
    CHECK(format_blocks(bf.table[0].blocks).find(';') != std::string::npos);
    CHECK_THROWS(brute_force_search(build("[controls]\nkind = box\n"), ensemble_for(build("[controls]\nkind = box\n")), 2));
}

TEST_CASE("rates on a spike equal to the reference are identically zero")
{
    const Scenario s = fixture("degenerate.cfg");
    const PathEnsemble e(s.seed, 50, s.time.n_t, s.K(), s.dt());
    const auto r = rate_experiment(RateKind::residual, s, e);
    CHECK(r.identically_zero);
    CHECK_FALSE(r.fit.defined);
    const Verdict v = verdict_of(r);
    CHECK(v.pass);
    CHECK(v.stat.empty());
    CHECK(format_verdict(v).find("stat=undefined") != std::string::npos);
}

TEST_CASE("rate kinds and thresholds")
{
    CHECK(parse_rate_kind("residual") == RateKind::residual);
    CHECK(std::string(to_string(RateKind::hgamma)) == "hgamma");
    CHECK(rate_threshold(RateKind::residual) == 2.2);
    CHECK(rate_threshold(RateKind::y_moment) == 0.9);
    try {
        parse_rate_kind("speed");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.invariant() == "rates.kind");
    }
}

TEST_CASE("verdict lines round trip")
{
    const Verdict v{"duality.first.random1", false, "0.0123", "0.05", "needs more paths"};
    const std::string line = format_verdict(v);
    CHECK(line == "VERDICT id=duality.first.random1 result=FAIL stat=0.0123 tol=0.05 note=needs_more_paths");
    Verdict back;
    REQUIRE(parse_verdict(line, back));
    CHECK(back.id == v.id);
    CHECK_FALSE(back.pass);
    CHECK(back.stat == "0.0123");
    CHECK(back.tol == "0.05");
    CHECK(back.note == "needs_more_paths");
    CHECK_FALSE(parse_verdict("RUN dir=x", back));

    std::ostringstream os;
    write_summary(os, {v, Verdict{"a", true, "1", "2", ""}});
    CHECK(os.str().find("1/2 passed") != std::string::npos);
}

TEST_CASE("csv writers start with a schema line")
{
    std::ostringstream os;
    write_duality_csv(os, {make_report("d", "p", {1.0, 2.0}, {1.0, 2.0}, true, 0.05)});
    const std::string text = os.str();
    CHECK(text.rfind("# schema: smplab/duality v1\n", 0) == 0);
    CHECK(text.find("id,probe,lhs,lhs_se,rhs,rhs_se,diff,diff_se,relative_gap,paths,crn,tol,pass") !=
          std::string::npos);
    std::ostringstream reg;
    write_regression_csv(reg, {RegressionDiagnostics{3, "p", 2.5, 0.9, 4}});
    CHECK(reg.str().rfind("# schema: smplab/regression v1\n", 0) == 0);
}

TEST_CASE("oracle checks pass on the noise-free fixture")
{
    const Scenario s = fixture("zero_noise.cfg");
    const PathEnsemble e = ensemble_for(s);
    const auto xbar = simulate_state(s, s.reference, e);
    const auto pq = solve_adjoint1(s, xbar, e, basis_of(s));
    const auto rp = check_oracle_p(s, pq);
    CHECK(rp.pass);
    CHECK(rp.relative_error <= 1e-10);
    const auto PQ = solve_adjoint2(s, pq, e, Terminal2::diagonal());
    const auto rP = check_oracle_P(s, pq, PQ);
    CHECK(rP.id == "oracle.P.limit");
    CHECK(rP.pass);
}
