#pragma once
// Reference implementations for the tests, written from the defining
// formulas with dense linear algebra and plain loops.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

/// Dense matrix of d/dl(a d/dl) with Dirichlet data, coefficient at midpoints.
inline Eigen::MatrixXd divergence_matrix(const std::vector<double>& a_mid, double h)
{
    const auto n = static_cast<Eigen::Index>(a_mid.size()) - 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, i) = -(a_mid[static_cast<std::size_t>(i)] + a_mid[static_cast<std::size_t>(i) + 1]) / (h * h);
        if (i > 0) {
            A(i, i - 1) = a_mid[static_cast<std::size_t>(i)] / (h * h);
        }
        if (i + 1 < n) {
            A(i, i + 1) = a_mid[static_cast<std::size_t>(i) + 1] / (h * h);
        }
    }
    return A;
}

inline Eigen::MatrixXd laplacian_matrix(std::size_t n, double h)
{
    return divergence_matrix(std::vector<double>(n + 1, 1.0), h);
}

/// Eigenvalues of -A for the Dirichlet Laplacian on an interval of length L.
inline std::vector<double> laplacian_eigenvalues(std::size_t n, double L)
{
    const double h = L / static_cast<double>(n + 1);
    std::vector<double> out;
    for (std::size_t j = 1; j <= n; ++j) {
        const double s = std::sin(static_cast<double>(j) * std::numbers::pi * h / (2.0 * L));
        out.push_back(4.0 / (h * h) * s * s);
    }
    return out;
}

/// Kronecker sum A (x) I + I (x) A in row-major vec order.
inline Eigen::MatrixXd kron_sum(const Eigen::MatrixXd& A)
{
    const auto n = A.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index l = 0; l < n; ++l) {
            out.block(i * n, l * n, n, n) += A(i, l) * I;
        }
        out.block(i * n, i * n, n, n) += A;
    }
    return out;
}

/// -A^{-1}-weighted inner product on the line: <f, (-A)^{-1} g> in the h-weighted product.
inline double hminus1_inner(const Eigen::MatrixXd& A, const Eigen::VectorXd& f, const Eigen::VectorXd& g, double w)
{
    const Eigen::VectorXd s = (-A).partialPivLu().solve(g);
    return w * f.dot(s);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = u(rng);
    }
    return v;
}

/// Least squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

} // namespace oracle
