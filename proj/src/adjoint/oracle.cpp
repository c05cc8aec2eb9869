#include "smplab/adjoint/oracle.hpp"

#include <cmath>
#include <numbers>

#include "smplab/error.hpp"

namespace smplab {

namespace {

Eigen::MatrixXd dense_resolvent(const EllipticOperator& op, double dt)
{
    const auto n = static_cast<Eigen::Index>(op.grid().size());
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) - dt * dense_operator(op);
    return B.partialPivLu().inverse();
}

void require_zero_noise(const Scenario& s, const StateHistory& xbar, std::size_t path)
{
    for (std::size_t k = 0; k < xbar.n_t(); ++k) {
        const ControlPoint& u = xbar.u.at(k, path);
        for (Eigen::Index i = 0; i < xbar.x[k].cols(); ++i) {
            for (std::size_t m = 0; m < s.K(); ++m) {
                const double x = xbar.x[k](static_cast<Eigen::Index>(path), i);
                if (s.coeffs.sigma(x, u, m) != 0.0) {
                    throw ValidationError("oracle.zero_noise", "sigma does not vanish along the reference");
                }
            }
        }
    }
}

} // namespace

Eigen::MatrixXd dense_operator(const EllipticOperator& op)
{
    const auto n = static_cast<Eigen::Index>(op.grid().size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, i) = op.diag()[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            A(i, i + 1) = op.off()[static_cast<std::size_t>(i)];
            A(i + 1, i) = op.off()[static_cast<std::size_t>(i)];
        }
    }
    return A;
}

std::vector<Eigen::VectorXd> deterministic_ptilde(const Scenario& s, const StateHistory& xbar, std::size_t path)
{
    require_zero_noise(s, xbar, path);
    const auto& c = s.coeffs;
    const std::size_t N = xbar.n_t();
    const auto n = static_cast<Eigen::Index>(s.n());
    const auto row = static_cast<Eigen::Index>(path);
    const double dt = s.dt();
    const Eigen::MatrixXd R = dense_resolvent(s.op, dt);
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p[i] = c.h_x(xbar.x[N](row, i));
    }
    std::vector<Eigen::VectorXd> out(N);
    for (std::size_t k = N; k-- > 0;) {
        out[k] = R * p;
        const ControlPoint& u = xbar.u.at(k, path);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = xbar.x[k](row, i);
            p[i] = out[k][i] + dt * (c.b_x(x, u) * out[k][i] + c.l_x(x, u));
        }
    }
    return out;
}

std::vector<Eigen::VectorXd> deterministic_Ptilde(const Scenario& s, const StateHistory& xbar,
                                                  const std::vector<Eigen::VectorXd>& ptilde,
                                                  const Terminal2& terminal, std::size_t path)
{
    require_zero_noise(s, xbar, path);
    const auto& c = s.coeffs;
    const std::size_t N = xbar.n_t();
    const auto n = static_cast<Eigen::Index>(s.n());
    const auto row = static_cast<Eigen::Index>(path);
    const double dt = s.dt();
    const double h = s.grid.spacing();
    const Eigen::MatrixXd A = dense_operator(s.op);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    // Row-major vec: (A (x) I + I (x) A) acting on P(i, j) at index i*n + j.
    Eigen::MatrixXd A2 = Eigen::MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index l = 0; l < n; ++l) {
                A2(i * n + j, l * n + j) += A(i, l);
                A2(i * n + j, i * n + l) += A(j, l);
            }
        }
    }
    const Eigen::MatrixXd R2 =
        (Eigen::MatrixXd::Identity(n * n, n * n) - dt * A2).partialPivLu().inverse();

    Eigen::VectorXd P = Eigen::VectorXd::Zero(n * n);
    if (terminal.kind != Terminal2::Kind::zero) {
        const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * terminal.eta);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double wi = c.h_xx(xbar.x[N](row, i));
            if (terminal.kind == Terminal2::Kind::diagonal) {
                P[i * n + i] = wi / h;
                continue;
            }
            for (Eigen::Index j = 0; j < n; ++j) {
                const double wj = c.h_xx(xbar.x[N](row, j));
                const double d = static_cast<double>(i - j) * h;
                P[i * n + j] = 0.5 * (wi + wj) * norm * std::exp(-d * d / (4.0 * terminal.eta));
            }
        }
    }
    std::vector<Eigen::VectorXd> out(N);
    Eigen::VectorXd bx(n);
    for (std::size_t k = N; k-- > 0;) {
        out[k] = R2 * P;
        const ControlPoint& u = xbar.u.at(k, path);
        for (Eigen::Index i = 0; i < n; ++i) {
            bx[i] = c.b_x(xbar.x[k](row, i), u);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                P[i * n + j] = out[k][i * n + j] * (1.0 + dt * (bx[i] + bx[j]));
            }
            const double x = xbar.x[k](row, i);
            P[i * n + i] += dt / h * (c.l_xx(x, u) + c.b_xx(x, u) * ptilde[k][i]);
        }
    }
    return out;
}

RowMatrix AffineAdjoint::ptilde(std::size_t k, const RowMatrix& x) const
{
    RowMatrix out = x * G.at(k).transpose();
    out.rowwise() += g.at(k).transpose();
    return out;
}

AffineAdjoint affine_adjoint(const Scenario& s, const ControlProcess& u)
{
    if (!u.is_deterministic()) {
        throw ValidationError("oracle.affine", "the control must be deterministic");
    }
    const auto& c = s.coeffs;
    const std::size_t N = s.time.n_t;
    const auto n = static_cast<Eigen::Index>(s.n());
    const double dt = s.dt();
    const Field zero(s.grid);
    const std::vector<double> probes{-2.0, -0.5, 0.0, 0.7, 1.9};

    std::vector<ControlPoint> uk(N);
    std::vector<double> beta(N);
    double lxx = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        uk[k] = u.evaluate(k, zero.values(), s.grid);
        beta[k] = c.b_x(0.0, uk[k]);
        if (k == 0) {
            lxx = c.l_xx(0.0, uk[k]);
        }
        for (const double x : probes) {
            bool ok = c.b_x(x, uk[k]) == beta[k] && c.l_xx(x, uk[k]) == lxx;
            for (std::size_t m = 0; m < s.K(); ++m) {
                ok = ok && c.sigma_x(x, uk[k], m) == 0.0;
            }
            if (!ok) {
                throw ValidationError("oracle.affine", "coefficients are not affine in the state");
            }
        }
    }
    const double hxx = c.h_xx(0.0);
    for (const double x : probes) {
        if (c.h_xx(x) != hxx) {
            throw ValidationError("oracle.affine", "terminal cost is not quadratic");
        }
    }

    const Eigen::MatrixXd R = dense_resolvent(s.op, dt);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd M = hxx * I;
    Eigen::VectorXd mv = Eigen::VectorXd::Constant(n, c.h_x(0.0));
    AffineAdjoint out;
    out.G.resize(N);
    out.g.resize(N);
    for (std::size_t k = N; k-- > 0;) {
        const Eigen::MatrixXd RMR = R * M * R;
        const double growth = 1.0 + dt * beta[k];
        out.G[k] = RMR * growth;
        out.g[k] = RMR * Eigen::VectorXd::Constant(n, dt * c.b(0.0, uk[k])) + R * mv;
        M = growth * out.G[k] + dt * lxx * I;
        mv = growth * out.g[k] + Eigen::VectorXd::Constant(n, dt * c.l_x(0.0, uk[k]));
    }
    return out;
}

} // namespace smplab
