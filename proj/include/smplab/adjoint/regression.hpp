#pragma once

#include <string>
#include <vector>

#include "smplab/numerics/spectral_basis.hpp"

namespace smplab {

/// Features of the forward state used to approximate conditional
/// expectations: the first `linear_modes` spectral coefficients of x and the
/// pairwise products of the first `quadratic_modes`. The constant enters
/// through centering.
struct RegressionBasis {
    std::size_t linear_modes = 12;
    std::size_t quadratic_modes = 3;

    std::size_t raw_count() const noexcept
    {
        return linear_modes + quadratic_modes * (quadratic_modes + 1) / 2;
    }
    /// Clamps the mode counts to the grid size.
    RegressionBasis clamped(std::size_t n) const noexcept;
};

struct RegressionDiagnostics {
    std::size_t step = 0;
    std::string target;
    double condition = 1.0;
    double r2 = 0.0;
    std::size_t features = 0;
};

/// Standardized design at one time step. Features with (numerically) zero
/// variance, and features collinear with earlier ones, are dropped; when all
/// are dropped the fit is the plain mean.
class StepDesign {
public:
    StepDesign() = default;
    /// Throws RegressionError when the Gram matrix condition exceeds 1e10
    /// or when fewer than 20 paths per feature are available.
    StepDesign(const RegressionBasis& basis, const SpectralBasis& spectral, const RowMatrix& x);

    std::size_t features() const noexcept { return kept_.size(); }
    double condition() const noexcept { return condition_; }
    const RowMatrix& X() const noexcept { return X_; }
    /// Same standardization applied to another block of states.
    RowMatrix transform(const RowMatrix& x) const;
    /// X^T X / M.
    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    void release_design() { X_.resize(0, 0); }

private:
    RowMatrix raw_features(const RowMatrix& x) const;

    RegressionBasis basis_;
    Eigen::MatrixXd projection_; // sqrt(h) times the leading eigenvectors
    std::vector<Eigen::Index> kept_;
    Eigen::RowVectorXd mean_;
    Eigen::RowVectorXd scale_;
    RowMatrix X_;
    Eigen::MatrixXd gram_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double condition_ = 1.0;

    friend class LinearFit;
};

/// y ~ intercept + X coef, one column per target component. Rows of
/// `coef` follow the kept features of the design.
class LinearFit {
public:
    LinearFit() = default;
    /// X is the standardized block of the design (design.X() or transform()).
    LinearFit(const StepDesign& design, const RowMatrix& X, const RowMatrix& Y, double* r2 = nullptr);

    const Eigen::RowVectorXd& intercept() const noexcept { return intercept_; }
    const RowMatrix& coef() const noexcept { return coef_; }
    std::size_t width() const noexcept { return static_cast<std::size_t>(intercept_.size()); }

    /// intercept + X coef for a standardized design block.
    RowMatrix evaluate(const RowMatrix& X) const;
    /// Applies a linear map to every row (intercept and coefficients),
    /// e.g. a resolvent solve, in place.
    template <class F>
    void map_rows(F&& f)
    {
        f(intercept_.data());
        for (Eigen::Index r = 0; r < coef_.rows(); ++r) {
            f(coef_.row(r).data());
        }
    }
    /// Stacked rows: intercept first, then coefficients.
    RowMatrix stacked() const;
    static LinearFit from_stacked(const RowMatrix& rows);

private:
    Eigen::RowVectorXd intercept_;
    RowMatrix coef_;
};

/// E_M ||intercept + X coef||^2_w for a centered design with Gram matrix G,
/// given the rows' weighted inner products W = S diag(w) S^T:
/// W(0,0) + trace(G W[1:,1:]).
double mean_square_from_rows(const Eigen::MatrixXd& weighted_gram_rows, const Eigen::MatrixXd& design_gram);

} // namespace smplab
