#pragma once

#include <vector>

#include "smplab/numerics/elliptic_operator.hpp"
#include "smplab/numerics/spectral_basis.hpp"

namespace smplab {

/// Resolvent R = (I - dt A)^{-1} on the line, pre-factored tridiagonal.
class Resolvent1D {
public:
    Resolvent1D() = default;
    Resolvent1D(const EllipticOperator& op, double dt);

    std::size_t size() const noexcept { return diag_.size(); }
    /// In-place solve on one contiguous vector of length n.
    void solve(double* v) const noexcept;
    /// In-place solve on every row of a row-major rows x n block.
    void solve_rows(double* data, std::size_t rows) const noexcept;

private:
    std::vector<double> diag_;   // modified pivots of the forward sweep
    std::vector<double> lower_;  // sub-diagonal of I - dt A
    std::vector<double> cprime_; // normalized super-diagonal
};

/// Resolvent (I - dt (A (x) I + I (x) A))^{-1} on the square, applied in the
/// eigenbasis of A.
class Resolvent2D {
public:
    Resolvent2D() = default;
    Resolvent2D(const SpectralBasis& basis, double dt);

    std::size_t side() const noexcept { return static_cast<std::size_t>(factor_.rows()); }
    /// In-place solve on a row-major n x n block.
    void solve(double* w) const;
    void solve_rows(double* data, std::size_t rows) const;

private:
    Eigen::MatrixXd vectors_;
    Eigen::MatrixXd factor_; // 1 / (1 + dt (lambda_i + lambda_j))
};

} // namespace smplab
