#include "smplab/numerics/implicit.hpp"

#include <algorithm>

#include "smplab/error.hpp"

namespace smplab {

Resolvent1D::Resolvent1D(const EllipticOperator& op, double dt)
{
    if (!(dt > 0.0)) {
        throw DomainError("time step must be positive");
    }
    const std::size_t n = op.grid().size();
    diag_.resize(n);
    lower_.assign(n, 0.0);
    cprime_.assign(n, 0.0);
    // Thomas factorization of I - dt A, which is strictly diagonally dominant.
    double prev_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = 1.0 - dt * op.diag()[i];
        const double lo = i > 0 ? -dt * op.off()[i - 1] : 0.0;
        const double up = i + 1 < n ? -dt * op.off()[i] : 0.0;
        const double piv = d - lo * prev_c;
        diag_[i] = piv;
        lower_[i] = lo;
        cprime_[i] = up / piv;
        prev_c = cprime_[i];
    }
}

void Resolvent1D::solve(double* v) const noexcept
{
    const std::size_t n = diag_.size();
    v[0] /= diag_[0];
    for (std::size_t i = 1; i < n; ++i) {
        v[i] = (v[i] - lower_[i] * v[i - 1]) / diag_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        v[i] -= cprime_[i] * v[i + 1];
    }
}

void Resolvent1D::solve_rows(double* data, std::size_t rows) const noexcept
{
    const std::size_t n = diag_.size();
    for (std::size_t r = 0; r < rows; ++r) {
        solve(data + r * n);
    }
}

Resolvent2D::Resolvent2D(const SpectralBasis& basis, double dt) : vectors_(basis.vectors())
{
    if (!(dt > 0.0)) {
        throw DomainError("time step must be positive");
    }
    const auto& ev = basis.eigenvalues();
    const Eigen::Index n = ev.size();
    factor_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            factor_(i, j) = 1.0 / (1.0 + dt * (ev[i] + ev[j]));
        }
    }
}

void Resolvent2D::solve(double* w) const
{
    const Eigen::Index n = factor_.rows();
    Eigen::Map<RowMatrix> m(w, n, n);
    Eigen::MatrixXd c = vectors_.transpose() * m * vectors_;
    c.array() *= factor_.array();
    m.noalias() = vectors_ * c * vectors_.transpose();
}

namespace {

// Every n x n block of a (blocks*n) x n row-major stack replaced by its transpose.
void transpose_blocks(RowMatrix& stack, Eigen::Index n)
{
    for (Eigen::Index b = 0; b < stack.rows() / n; ++b) {
        auto blk = stack.middleRows(b * n, n);
        blk.transposeInPlace();
    }
}

} // namespace

void Resolvent2D::solve_rows(double* data, std::size_t rows) const
{
    // Batched form of solve(): with B = F E for all blocks at once,
    //   E^T F E = ((F E)^T E)^T, and E C E^T = ((C^T E^T)^T E^T) likewise.
    const Eigen::Index n = factor_.rows();
    const Eigen::MatrixXd Et = vectors_.transpose();
    constexpr std::size_t chunk = 512;
    RowMatrix a;
    RowMatrix b;
    for (std::size_t r0 = 0; r0 < rows; r0 += chunk) {
        const auto blocks = static_cast<Eigen::Index>(std::min(chunk, rows - r0));
        Eigen::Map<RowMatrix> stack(data + r0 * static_cast<std::size_t>(n * n), blocks * n, n);
        a.noalias() = stack * vectors_;
        transpose_blocks(a, n);
        b.noalias() = a * vectors_; // blocks hold C^T
        for (Eigen::Index k = 0; k < blocks; ++k) {
            b.middleRows(k * n, n).array() *= factor_.transpose().array();
        }
        a.noalias() = b * Et;
        transpose_blocks(a, n);
        stack.noalias() = a * Et;
    }
}

} // namespace smplab
