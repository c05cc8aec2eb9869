#include "smplab/verification/duality.hpp"

#include <cmath>
#include <numbers>

#include "smplab/forward/ensemble.hpp"

namespace smplab {

namespace {

bool same_ensemble(const BackwardPair1& pq, const PathEnsemble& e)
{
    return pq.ensemble_seed() == e.seed() && pq.ensemble_paths() == e.paths();
}

// acc[p] += w * <a_p, b_p> (plain sums; callers fold in quadrature weights).
void add_row_dots(std::vector<double>& acc, double w, const RowMatrix& a, const RowMatrix& b)
{
    if (a.size() == 0 || b.size() == 0) {
        return;
    }
    const Eigen::VectorXd d = (a.array() * b.array()).rowwise().sum();
    for (Eigen::Index p = 0; p < d.size(); ++p) {
        acc[static_cast<std::size_t>(p)] += w * d[p];
    }
}

double sine(std::size_t j, std::size_t i, std::size_t n)
{
    return std::sin(static_cast<double>(j) * std::numbers::pi * static_cast<double>(i + 1) /
                    static_cast<double>(n + 1));
}

// Row of n values: sum_j c_j sin(j pi (i+1)/(n+1)), j = 1..c.size().
Eigen::RowVectorXd sine_row(const std::vector<double>& c, std::size_t n)
{
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c.size(); ++j) {
            r[static_cast<Eigen::Index>(i)] += c[j] * sine(j + 1, i, n);
        }
    }
    return r;
}

// Second order running weight f_k = l_xx + b_xx ptilde + sum sigma_xx q.
void running_weight(const Linearization& lin, const BackwardPair1& pq, std::size_t k, RowMatrix& f)
{
    const auto& c = lin.scenario().coeffs;
    RowMatrix pt;
    std::vector<RowMatrix> q;
    RowMatrix tmp;
    pq.evaluate(k, pt, q);
    const ControlAt ub = lin.reference(k);
    lin.drift(c.l_xx, k, ub, f);
    lin.drift(c.b_xx, k, ub, tmp);
    f.array() += tmp.array() * pt.array();
    for (std::size_t m = 0; m < q.size(); ++m) {
        lin.noise(c.sigma_xx, m, k, ub, tmp);
        f.array() += tmp.array() * q[m].array();
    }
}

RowMatrix diagonal_of(const RowMatrix& Y, std::size_t n)
{
    const auto nn = static_cast<Eigen::Index>(n);
    RowMatrix d(Y.rows(), nn);
    for (Eigen::Index p = 0; p < Y.rows(); ++p) {
        for (Eigen::Index i = 0; i < nn; ++i) {
            d(p, i) = Y(p, i * nn + i);
        }
    }
    return d;
}

} // namespace

DualityReport make_report(std::string id, std::string probe, const std::vector<double>& lhs,
                          const std::vector<double>& rhs, bool crn, double tol)
{
    DualityReport r;
    r.id = std::move(id);
    r.probe = std::move(probe);
    r.lhs = estimate(lhs);
    r.rhs = estimate(rhs);
    r.diff = paired_difference(lhs, rhs);
    r.paths = lhs.size();
    r.crn = crn;
    r.tol = tol;
    bool vanish = true;
    for (std::size_t p = 0; p < lhs.size(); ++p) {
        vanish = vanish && lhs[p] == 0.0 && rhs[p] == 0.0;
    }
    if (vanish) {
        r.relative_gap = 0.0;
        r.pass = crn;
        return r;
    }
    const double scale = std::abs(r.rhs.mean);
    r.relative_gap = scale > 0.0 ? std::abs(r.diff.mean) / scale : std::numeric_limits<double>::infinity();
    r.pass = crn && std::abs(r.diff.mean) + 2.0 * r.diff.se <= tol * scale;
    return r;
}

Probe1 zero_probe1()
{
    return Probe1{"zero", [](std::size_t, const RowMatrix&, RowMatrix& phi, std::vector<RowMatrix>& psi) {
                      phi.resize(0, 0);
                      psi.clear();
                  }};
}

Probe2 zero_probe2()
{
    return Probe2{"zero", [](std::size_t, const RowMatrix&, RowMatrix& Phi, std::vector<RowMatrix>& Psi) {
                      Phi.resize(0, 0);
                      Psi.clear();
                  }};
}

std::vector<Probe1> random_probes1(const Scenario& s, std::size_t count, std::uint64_t seed, bool adapted)
{
    const std::size_t n = s.n();
    const std::size_t K = s.K();
    const double T = s.time.T;
    const double dt = s.dt();
    std::vector<Probe1> out;
    for (std::size_t r = 0; r < count; ++r) {
        if (adapted && r + 1 == count) {
            out.push_back(Probe1{"adapted", [K](std::size_t, const RowMatrix& x, RowMatrix& phi,
                                                std::vector<RowMatrix>& psi) {
                                     phi = 0.5 * x;
                                     psi.resize(K);
                                     for (std::size_t m = 0; m < K; ++m) {
                                         psi[m] = (0.3 / static_cast<double>(m + 1)) * x;
                                     }
                                 }});
            continue;
        }
        // Draw coefficients (alpha_j, beta_j) for phi and each psi_m.
        std::uint64_t counter = 0;
        const auto draw = [&] { return PathEnsemble::standard_normal(seed, r, counter++, 0x9e37); };
        std::vector<double> a0(3), a1(3);
        for (std::size_t j = 0; j < 3; ++j) {
            a0[j] = draw() / static_cast<double>(j + 1);
            a1[j] = draw() / static_cast<double>(j + 1);
        }
        std::vector<std::vector<double>> b0(K, std::vector<double>(3)), b1(K, std::vector<double>(3));
        for (std::size_t m = 0; m < K; ++m) {
            for (std::size_t j = 0; j < 3; ++j) {
                b0[m][j] = 0.5 * draw() / static_cast<double>(j + 1);
                b1[m][j] = 0.5 * draw() / static_cast<double>(j + 1);
            }
        }
        const Eigen::RowVectorXd phi0 = sine_row(a0, n);
        const Eigen::RowVectorXd phi1 = sine_row(a1, n);
        std::vector<Eigen::RowVectorXd> psi0, psi1;
        for (std::size_t m = 0; m < K; ++m) {
            psi0.push_back(sine_row(b0[m], n));
            psi1.push_back(sine_row(b1[m], n));
        }
        out.push_back(Probe1{"random" + std::to_string(r),
                             [=](std::size_t k, const RowMatrix& x, RowMatrix& phi, std::vector<RowMatrix>& psi) {
                                 const double t = static_cast<double>(k) * dt / T;
                                 const Eigen::RowVectorXd row = phi0 + t * phi1;
                                 phi = row.replicate(x.rows(), 1);
                                 psi.resize(K);
                                 for (std::size_t m = 0; m < K; ++m) {
                                     const Eigen::RowVectorXd rm = psi0[m] + t * psi1[m];
                                     psi[m] = rm.replicate(x.rows(), 1);
                                 }
                             }});
    }
    return out;
}

std::vector<Probe2> random_probes2(const Scenario& s, std::size_t count, std::uint64_t seed)
{
    const std::size_t n = s.n();
    const std::size_t K = s.K();
    const auto nn = static_cast<Eigen::Index>(n);
    std::vector<Probe2> out;
    for (std::size_t r = 0; r < count; ++r) {
        std::uint64_t counter = 0;
        const auto draw = [&] { return PathEnsemble::standard_normal(seed, r, counter++, 0x7f4a); };
        // Symmetric tensor sum_{a,b} c_ab s_a (x) s_b over the first three modes;
        // c = B B^T for Phi so that its pairing with P cannot cancel out.
        const auto tensor = [&](double amp, bool definite) {
            Eigen::Matrix3d c;
            for (int a = 0; a < 3; ++a) {
                for (int b = definite ? 0 : a; b < 3; ++b) {
                    c(a, b) = amp * draw() / static_cast<double>((a + 1) * (b + 1));
                    if (!definite) {
                        c(b, a) = c(a, b);
                    }
                }
            }
            if (definite) {
                c = (c * c.transpose()).eval();
            }
            Eigen::RowVectorXd row(nn * nn);
            for (Eigen::Index i = 0; i < nn; ++i) {
                for (Eigen::Index j = 0; j < nn; ++j) {
                    double v = 0.0;
                    for (int a = 0; a < 3; ++a) {
                        for (int b = 0; b < 3; ++b) {
                            v += c(a, b) * sine(static_cast<std::size_t>(a + 1), static_cast<std::size_t>(i), n) *
                                 sine(static_cast<std::size_t>(b + 1), static_cast<std::size_t>(j), n);
                        }
                    }
                    row[i * nn + j] = v;
                }
            }
            return row;
        };
        const Eigen::RowVectorXd Phi0 = tensor(1.0, true);
        std::vector<Eigen::RowVectorXd> Psi0;
        for (std::size_t m = 0; m < K; ++m) {
            Psi0.push_back(tensor(0.5, false));
        }
        out.push_back(Probe2{"random" + std::to_string(r),
                             [=](std::size_t, const RowMatrix& x, RowMatrix& Phi, std::vector<RowMatrix>& Psi) {
                                 Phi = Phi0.replicate(x.rows(), 1);
                                 Psi.resize(K);
                                 for (std::size_t m = 0; m < K; ++m) {
                                     Psi[m] = Psi0[m].replicate(x.rows(), 1);
                                 }
                             }});
    }
    return out;
}

DualityReport check_duality1(const Scenario& s, const BackwardPair1& pq, const PathEnsemble& e, const Probe1& probe,
                             double tol)
{
    const StateHistory& xbar = pq.designs().xbar();
    const Linearization lin(s, xbar);
    const std::size_t N = s.time.n_t;
    const std::size_t M = e.paths();
    const double dt = s.dt();
    const double h = s.grid.spacing();
    const auto& c = s.coeffs;
    std::vector<double> lhs(M, 0.0);
    std::vector<double> rhs(M, 0.0);
    RowMatrix pt;
    std::vector<RowMatrix> q;
    RowMatrix lx;
    const LinearSystem system = [&](std::size_t k, const RowMatrix&, LinearStep& st) {
        lin.first_order(k, st.a, st.s);
        probe.fill(k, xbar.x[k], st.phi, st.psi);
        pq.evaluate(k, pt, q);
        add_row_dots(rhs, dt * h, pt, st.phi);
        for (std::size_t m = 0; m < st.psi.size() && m < q.size(); ++m) {
            add_row_dots(rhs, dt * h, q[m], st.psi[m]);
        }
    };
    const LinearObserver observe = [&](std::size_t k, const RowMatrix& y) {
        if (k == N) {
            add_row_dots(lhs, h, pq.p(N), y);
            return;
        }
        lin.drift(c.l_x, k, lin.reference(k), lx);
        add_row_dots(lhs, dt * h, lx, y);
    };
    simulate_linear(s, e, system, observe);
    return make_report("duality1", probe.name, lhs, rhs, same_ensemble(pq, e), tol);
}

DualityReport check_duality2(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& PQ,
                             const PathEnsemble& e, const Probe2& probe, double tol)
{
    const StateHistory& xbar = pq.designs().xbar();
    const Linearization lin(s, xbar);
    const std::size_t N = s.time.n_t;
    const std::size_t M = e.paths();
    const std::size_t n = s.n();
    const double dt = s.dt();
    const double h = s.grid.spacing();
    std::vector<double> lhs(M, 0.0);
    std::vector<double> rhs(M, 0.0);
    RowMatrix Pt;
    std::vector<RowMatrix> Q;
    RowMatrix f;
    const LinearSystem system = [&](std::size_t k, const RowMatrix&, LinearStep& st) {
        lin.second_order(k, st.a, st.s);
        probe.fill(k, xbar.x[k], st.phi, st.psi);
        PQ.evaluate(k, Pt, Q);
        add_row_dots(rhs, dt * h * h, Pt, st.phi);
        for (std::size_t m = 0; m < st.psi.size() && m < Q.size(); ++m) {
            add_row_dots(rhs, dt * h * h, Q[m], st.psi[m]);
        }
    };
    const LinearObserver observe = [&](std::size_t k, const RowMatrix& Y) {
        if (k == N) {
            add_row_dots(lhs, h * h, PQ.terminal(), Y);
            return;
        }
        running_weight(lin, pq, k, f);
        add_row_dots(lhs, dt * h, f, diagonal_of(Y, n));
    };
    simulate_linear_tensor(s, e, system, observe);
    return make_report("duality2", probe.name, lhs, rhs, same_ensemble(pq, e), tol);
}

DualityReport check_spike_duality2(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& PQ,
                                   const PathEnsemble& e, const ControlProcess& spike, bool tensor, double tol)
{
    const StateHistory& xbar = pq.designs().xbar();
    const Linearization lin(s, xbar);
    const std::size_t N = s.time.n_t;
    const std::size_t M = e.paths();
    const std::size_t n = s.n();
    const double dt = s.dt();
    const double h = s.grid.spacing();
    std::vector<double> lhs(M, 0.0);
    std::vector<double> rhs(M, 0.0);
    RowMatrix Pt;
    std::vector<RowMatrix> Q;
    RowMatrix Phi;
    std::vector<RowMatrix> Psi;
    RowMatrix f;
    RowMatrix yy;
    simulate_tensor(lin, spike, e, [&](std::size_t k, const RowMatrix& y, const RowMatrix& Y) {
        if (k == N) {
            if (tensor) {
                add_row_dots(lhs, h * h, PQ.terminal(), Y);
            } else {
                outer_rows(y, y, yy);
                add_row_dots(lhs, h * h, PQ.terminal(), yy);
            }
            return;
        }
        running_weight(lin, pq, k, f);
        if (tensor) {
            add_row_dots(lhs, dt * h, f, diagonal_of(Y, n));
        } else {
            add_row_dots(lhs, dt * h, f, y.array().square().matrix());
        }
        if (tensor_sources(lin, spike, k, y, Phi, Psi)) {
            PQ.evaluate(k, Pt, Q);
            add_row_dots(rhs, dt * h * h, Pt, Phi);
            for (std::size_t m = 0; m < Psi.size(); ++m) {
                add_row_dots(rhs, dt * h * h, Q[m], Psi[m]);
            }
        }
    });
    return make_report(tensor ? "duality2_spike" : "duality2_quadratic", "spike " + PQ.tag(), lhs, rhs,
                       same_ensemble(pq, e), tol);
}

DualityReport check_limit_duality2(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& limit,
                           const PathEnsemble& e, const ControlProcess& spike, double tol)
{
    DualityReport r = check_spike_duality2(s, pq, limit, e, spike, false, tol);
    r.id = "limit_identity";
    return r;
}

} // namespace smplab
