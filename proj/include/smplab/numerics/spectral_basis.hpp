#pragma once

#include <Eigen/Dense>

#include "smplab/numerics/elliptic_operator.hpp"
#include "smplab/numerics/grid.hpp"

namespace smplab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Eigenpairs of -A. Columns of vectors() are orthonormal in the Euclidean
/// product; the L2 coefficients of a field f are sqrt(h) * E^T f so that
/// coefficient sums reproduce the quadrature norm. On the square the same
/// basis is used in both variables with eigenvalues lambda_i + lambda_j.
class SpectralBasis {
public:
    SpectralBasis() = default;
    explicit SpectralBasis(const EllipticOperator& op);

    const Grid1D& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    const Eigen::MatrixXd& vectors() const noexcept { return vectors_; }

    Eigen::VectorXd coefficients(const Field& f) const;
    Eigen::MatrixXd coefficients(const TensorField& f) const;
    Field synthesize(const Eigen::VectorXd& c) const;
    TensorField synthesize(const Eigen::MatrixXd& c) const;

    /// Field with unit L2 norm along eigenvector j (0-based).
    Field mode(std::size_t j) const;

private:
    Grid1D grid_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd vectors_;
};

/// sqrt(sum_j lambda_j^gamma c_j^2); gamma in [-2, 1].
double sobolev_norm(const Field& f, const SpectralBasis& basis, double gamma);
double sobolev_norm(const TensorField& f, const SpectralBasis& basis, double gamma);

/// sum_j lambda_j^gamma f_j g_j, the matching inner product.
double sobolev_inner(const Field& f, const Field& g, const SpectralBasis& basis, double gamma);
double sobolev_inner(const TensorField& f, const TensorField& g, const SpectralBasis& basis, double gamma);

/// Coefficients h E^T F E of every row of a rows x n*n block of tensors
/// (row-major n x n per row), computed with batched products.
RowMatrix tensor_coefficient_rows(const SpectralBasis& basis, const RowMatrix& rows);

/// Weights lambda^gamma on the square, (i, j) -> (lambda_i + lambda_j)^gamma.
Eigen::MatrixXd tensor_weights(const SpectralBasis& basis, double gamma);

} // namespace smplab
