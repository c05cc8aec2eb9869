#include "smplab/numerics/spectral_basis.hpp"

#include <cmath>
#include <numbers>

#include "smplab/error.hpp"

namespace smplab {

SpectralBasis::SpectralBasis(const EllipticOperator& op) : grid_(op.grid())
{
    const Eigen::Index n = static_cast<Eigen::Index>(grid_.size());
    eigenvalues_.resize(n);
    vectors_.resize(n, n);
    if (op.kind() == OperatorKind::laplacian) {
        const double h = grid_.spacing();
        const double np1 = static_cast<double>(n + 1);
        const double norm = std::sqrt(2.0 / np1);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = std::sin(static_cast<double>(j + 1) * std::numbers::pi / (2.0 * np1));
            eigenvalues_[j] = 4.0 / (h * h) * s * s;
            for (Eigen::Index i = 0; i < n; ++i) {
                vectors_(i, j) =
                    norm * std::sin(static_cast<double>(j + 1) * static_cast<double>(i + 1) * std::numbers::pi / np1);
            }
        }
        return;
    }
    Eigen::MatrixXd neg = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        neg(i, i) = -op.diag()[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            neg(i, i + 1) = -op.off()[static_cast<std::size_t>(i)];
            neg(i + 1, i) = neg(i, i + 1);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(neg);
    if (solver.info() != Eigen::Success) {
        throw DomainError("eigen-decomposition of the divergence-form operator failed");
    }
    eigenvalues_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
    // Fix the sign convention so the largest-magnitude entry of each vector is positive.
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index k = 0;
        vectors_.col(j).cwiseAbs().maxCoeff(&k);
        if (vectors_(k, j) < 0.0) {
            vectors_.col(j) *= -1.0;
        }
    }
}

Eigen::VectorXd SpectralBasis::coefficients(const Field& f) const
{
    if (!(f.grid() == grid_)) {
        throw StructuralError("spectral coefficients: grid mismatch");
    }
    Eigen::Map<const Eigen::VectorXd> v(f.values().data(), static_cast<Eigen::Index>(f.size()));
    return std::sqrt(grid_.spacing()) * (vectors_.transpose() * v);
}

Eigen::MatrixXd SpectralBasis::coefficients(const TensorField& f) const
{
    if (!(f.grid().base() == grid_)) {
        throw StructuralError("spectral coefficients: grid mismatch");
    }
    const auto n = static_cast<Eigen::Index>(f.side());
    Eigen::Map<const RowMatrix> w(f.values().data(), n, n);
    return grid_.spacing() * (vectors_.transpose() * w * vectors_);
}

Field SpectralBasis::synthesize(const Eigen::VectorXd& c) const
{
    Field f(grid_);
    Eigen::Map<Eigen::VectorXd> v(f.values().data(), static_cast<Eigen::Index>(f.size()));
    v = (vectors_ * c) / std::sqrt(grid_.spacing());
    return f;
}

TensorField SpectralBasis::synthesize(const Eigen::MatrixXd& c) const
{
    TensorField f{Grid2D(grid_)};
    f.set_symmetric(false);
    const auto n = static_cast<Eigen::Index>(grid_.size());
    Eigen::Map<RowMatrix> w(f.values().data(), n, n);
    w = (vectors_ * c * vectors_.transpose()) / grid_.spacing();
    return f;
}

Field SpectralBasis::mode(std::size_t j) const
{
    Eigen::VectorXd c = Eigen::VectorXd::Zero(eigenvalues_.size());
    c[static_cast<Eigen::Index>(j)] = 1.0;
    return synthesize(c);
}

namespace {

void check_gamma(double gamma)
{
    if (!(gamma >= -2.0 && gamma <= 1.0)) {
        throw DomainError("sobolev order must lie in [-2, 1]");
    }
}

} // namespace

Eigen::MatrixXd tensor_weights(const SpectralBasis& basis, double gamma)
{
    const auto& ev = basis.eigenvalues();
    const Eigen::Index n = ev.size();
    Eigen::MatrixXd w(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            w(i, j) = std::pow(ev[i] + ev[j], gamma);
        }
    }
    return w;
}

RowMatrix tensor_coefficient_rows(const SpectralBasis& basis, const RowMatrix& rows)
{
    const auto n = static_cast<Eigen::Index>(basis.size());
    if (rows.cols() != n * n) {
        throw StructuralError("tensor rows do not match the basis");
    }
    const Eigen::MatrixXd& E = basis.vectors();
    // Stacked n x n blocks: (F E)^T E = E^T F^T E, transposed back per block.
    const Eigen::Map<const RowMatrix> stack(rows.data(), rows.rows() * n, n);
    RowMatrix a = stack * E;
    for (Eigen::Index b = 0; b < rows.rows(); ++b) {
        a.middleRows(b * n, n).transposeInPlace();
    }
    RowMatrix c = basis.grid().spacing() * (a * E);
    for (Eigen::Index b = 0; b < rows.rows(); ++b) {
        c.middleRows(b * n, n).transposeInPlace();
    }
    return Eigen::Map<const RowMatrix>(c.data(), rows.rows(), n * n);
}

double sobolev_inner(const Field& f, const Field& g, const SpectralBasis& basis, double gamma)
{
    check_gamma(gamma);
    const Eigen::VectorXd cf = basis.coefficients(f);
    const Eigen::VectorXd cg = basis.coefficients(g);
    double s = 0.0;
    for (Eigen::Index j = 0; j < cf.size(); ++j) {
        s += std::pow(basis.eigenvalues()[j], gamma) * cf[j] * cg[j];
    }
    return s;
}

double sobolev_inner(const TensorField& f, const TensorField& g, const SpectralBasis& basis, double gamma)
{
    check_gamma(gamma);
    const Eigen::MatrixXd cf = basis.coefficients(f);
    const Eigen::MatrixXd cg = basis.coefficients(g);
    return (tensor_weights(basis, gamma).array() * cf.array() * cg.array()).sum();
}

double sobolev_norm(const Field& f, const SpectralBasis& basis, double gamma)
{
    return std::sqrt(std::max(0.0, sobolev_inner(f, f, basis, gamma)));
}

double sobolev_norm(const TensorField& f, const SpectralBasis& basis, double gamma)
{
    return std::sqrt(std::max(0.0, sobolev_inner(f, f, basis, gamma)));
}

} // namespace smplab
