#include "smplab/adjoint/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smplab/error.hpp"

namespace smplab {

RegressionBasis RegressionBasis::clamped(std::size_t n) const noexcept
{
    return RegressionBasis{std::min(linear_modes, n), std::min(quadratic_modes, n)};
}

StepDesign::StepDesign(const RegressionBasis& basis, const SpectralBasis& spectral, const RowMatrix& x)
    : basis_(basis.clamped(spectral.size()))
{
    const Eigen::Index n = static_cast<Eigen::Index>(spectral.size());
    const Eigen::Index J = static_cast<Eigen::Index>(std::max(basis_.linear_modes, basis_.quadratic_modes));
    projection_ = std::sqrt(spectral.grid().spacing()) * spectral.vectors().leftCols(std::min(J, n));

    const Eigen::Index M = x.rows();
    const std::size_t raw = basis_.raw_count();
    if (raw * 20 > static_cast<std::size_t>(M)) {
        std::ostringstream msg;
        msg << raw << " regression features need at least " << raw * 20 << " paths, have " << M
            << "; reduce reg_linear / reg_quadratic";
        throw RegressionError(msg.str());
    }
    const RowMatrix F = raw_features(x);
    const double m = static_cast<double>(M);

    std::vector<double> means;
    std::vector<double> scales;
    for (Eigen::Index j = 0; j < F.cols(); ++j) {
        const double x0 = F(0, j);
        const double shifted = (F.col(j).array() - x0).sum() / m;
        const double mu = x0 + shifted;
        const double var = ((F.col(j).array() - x0) - shifted).square().sum() / m;
        const double sd = std::sqrt(var);
        if (sd > 1e-12 * (1.0 + std::abs(mu))) {
            kept_.push_back(j);
            means.push_back(mu);
            scales.push_back(sd);
        }
    }
    // Greedy pruning of (numerically) collinear features: a candidate is kept
    // when its standardized variance unexplained by the kept ones exceeds 1e-6.
    // Early steps of a single-mode ensemble are the typical case.
    {
        const auto Fs = static_cast<Eigen::Index>(kept_.size());
        RowMatrix Z(M, Fs);
        for (Eigen::Index c = 0; c < Fs; ++c) {
            Z.col(c) = (F.col(kept_[static_cast<std::size_t>(c)]).array() - means[static_cast<std::size_t>(c)]) /
                       scales[static_cast<std::size_t>(c)];
        }
        const Eigen::MatrixXd G = (Z.transpose() * Z) / m;
        std::vector<Eigen::Index> sel;
        for (Eigen::Index c = 0; c < Fs; ++c) {
            double unexplained = G(c, c);
            if (!sel.empty()) {
                const auto S = static_cast<Eigen::Index>(sel.size());
                Eigen::MatrixXd Gss(S, S);
                Eigen::VectorXd gsc(S);
                for (Eigen::Index i = 0; i < S; ++i) {
                    gsc[i] = G(sel[static_cast<std::size_t>(i)], c);
                    for (Eigen::Index j = 0; j < S; ++j) {
                        Gss(i, j) = G(sel[static_cast<std::size_t>(i)], sel[static_cast<std::size_t>(j)]);
                    }
                }
                unexplained -= gsc.dot(Gss.ldlt().solve(gsc));
            }
            if (unexplained > 1e-6) {
                sel.push_back(c);
            }
        }
        std::vector<Eigen::Index> kept;
        std::vector<double> mu;
        std::vector<double> sd;
        for (const Eigen::Index c : sel) {
            kept.push_back(kept_[static_cast<std::size_t>(c)]);
            mu.push_back(means[static_cast<std::size_t>(c)]);
            sd.push_back(scales[static_cast<std::size_t>(c)]);
        }
        kept_ = std::move(kept);
        means = std::move(mu);
        scales = std::move(sd);
    }
    const auto Fk = static_cast<Eigen::Index>(kept_.size());
    mean_ = Eigen::Map<const Eigen::RowVectorXd>(means.data(), Fk);
    scale_ = Eigen::Map<const Eigen::RowVectorXd>(scales.data(), Fk);
    X_.resize(M, Fk);
    for (Eigen::Index c = 0; c < Fk; ++c) {
        X_.col(c) = (F.col(kept_[static_cast<std::size_t>(c)]).array() - mean_[c]) / scale_[c];
    }
    if (Fk == 0) {
        gram_.resize(0, 0);
        return;
    }
    gram_ = (X_.transpose() * X_) / m;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(condition_ <= 1e10)) {
        std::ostringstream msg;
        msg << "regression Gram matrix condition " << condition_ << " exceeds 1e10; use fewer features";
        throw RegressionError(msg.str());
    }
    llt_.compute(gram_);
}

RowMatrix StepDesign::raw_features(const RowMatrix& x) const
{
    const RowMatrix c = x * projection_;
    const auto M = x.rows();
    const auto L = static_cast<Eigen::Index>(basis_.linear_modes);
    const auto Q = static_cast<Eigen::Index>(basis_.quadratic_modes);
    RowMatrix F(M, static_cast<Eigen::Index>(basis_.raw_count()));
    F.leftCols(L) = c.leftCols(L);
    Eigen::Index col = L;
    for (Eigen::Index a = 0; a < Q; ++a) {
        for (Eigen::Index b = a; b < Q; ++b) {
            F.col(col++) = c.col(a).cwiseProduct(c.col(b));
        }
    }
    return F;
}

RowMatrix StepDesign::transform(const RowMatrix& x) const
{
    const RowMatrix F = raw_features(x);
    RowMatrix out(x.rows(), static_cast<Eigen::Index>(kept_.size()));
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        out.col(c) = (F.col(kept_[static_cast<std::size_t>(c)]).array() - mean_[c]) / scale_[c];
    }
    return out;
}

LinearFit::LinearFit(const StepDesign& design, const RowMatrix& X, const RowMatrix& Y, double* r2)
{
    const Eigen::Index M = Y.rows();
    const double m = static_cast<double>(M);
    // Shifted mean: identical rows reproduce their value exactly.
    const Eigen::RowVectorXd y0 = Y.row(0);
    const Eigen::RowVectorXd shifted = (Y.rowwise() - y0).colwise().sum() / m;
    intercept_ = y0 + shifted;
    const auto F = static_cast<Eigen::Index>(design.features());
    if (F == 0) {
        coef_.resize(0, Y.cols());
    } else {
        const Eigen::MatrixXd rhs = (X.transpose() * Y) / m;
        coef_ = design.llt_.solve(rhs);
    }
    if (r2 != nullptr) {
        const double total = ((Y.rowwise() - y0).rowwise() - shifted).squaredNorm();
        if (total > 0.0 && F > 0) {
            const RowMatrix res = Y - evaluate(X);
            *r2 = 1.0 - res.squaredNorm() / total;
        } else {
            *r2 = total > 0.0 ? 0.0 : 1.0;
        }
    }
}

RowMatrix LinearFit::evaluate(const RowMatrix& X) const
{
    RowMatrix out(X.rows(), intercept_.size());
    out.rowwise() = intercept_;
    if (coef_.rows() > 0) {
        out.noalias() += X * coef_;
    }
    return out;
}

RowMatrix LinearFit::stacked() const
{
    RowMatrix rows(coef_.rows() + 1, intercept_.size());
    rows.row(0) = intercept_;
    rows.bottomRows(coef_.rows()) = coef_;
    return rows;
}

LinearFit LinearFit::from_stacked(const RowMatrix& rows)
{
    LinearFit f;
    f.intercept_ = rows.row(0);
    f.coef_ = rows.bottomRows(rows.rows() - 1);
    return f;
}

double mean_square_from_rows(const Eigen::MatrixXd& W, const Eigen::MatrixXd& G)
{
    double s = W(0, 0);
    const Eigen::Index F = G.rows();
    if (F > 0) {
        s += (G.array() * W.bottomRightCorner(F, F).array()).sum();
    }
    return s;
}

} // namespace smplab
