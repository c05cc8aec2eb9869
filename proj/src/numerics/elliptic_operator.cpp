#include "smplab/numerics/elliptic_operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smplab/error.hpp"

namespace smplab {

const char* to_string(OperatorKind kind) noexcept
{
    return kind == OperatorKind::laplacian ? "laplacian" : "divergence_form";
}

EllipticOperator::EllipticOperator(OperatorKind kind, const Grid1D& grid, std::vector<double> a_mid)
    : kind_(kind), grid_(grid), a_mid_(std::move(a_mid))
{
    const std::size_t n = grid_.size();
    const double ih2 = 1.0 / (grid_.spacing() * grid_.spacing());
    diag_.resize(n);
    off_.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        diag_[i] = -(a_mid_[i] + a_mid_[i + 1]) * ih2;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        off_[i] = a_mid_[i + 1] * ih2;
    }
}

EllipticOperator EllipticOperator::laplacian(const Grid1D& grid)
{
    return EllipticOperator(OperatorKind::laplacian, grid, std::vector<double>(grid.size() + 1, 1.0));
}

EllipticOperator EllipticOperator::divergence_form(const Grid1D& grid, std::vector<double> a_mid, double a0)
{
    if (a_mid.size() != grid.size() + 1) {
        throw StructuralError("divergence-form coefficient needs n+1 midpoint values");
    }
    if (!(a0 > 0.0)) {
        throw ValidationError("operator.a0", "ellipticity constant must be positive");
    }
    const double lo = *std::min_element(a_mid.begin(), a_mid.end());
    if (!(lo >= a0)) {
        throw ValidationError("operator.a_coeff", "coefficient minimum " + std::to_string(lo) +
                                                       " below ellipticity constant " + std::to_string(a0));
    }
    return EllipticOperator(OperatorKind::divergence_form, grid, std::move(a_mid));
}

EllipticOperator EllipticOperator::divergence_form(const Grid1D& grid, const std::function<double(double)>& a,
                                                   double a0)
{
    std::vector<double> mid(grid.size() + 1);
    const double h = grid.spacing();
    for (std::size_t m = 0; m <= grid.size(); ++m) {
        mid[m] = a(grid.a() + (static_cast<double>(m) + 0.5) * h);
    }
    return divergence_form(grid, std::move(mid), a0);
}

void EllipticOperator::apply(const double* f, double* out) const noexcept
{
    const std::size_t n = diag_.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag_[i] * f[i];
        if (i > 0) {
            s += off_[i - 1] * f[i - 1];
        }
        if (i + 1 < n) {
            s += off_[i] * f[i + 1];
        }
        out[i] = s;
    }
}

Field apply_operator(const EllipticOperator& op, const Field& f)
{
    if (!(op.grid() == f.grid())) {
        throw StructuralError("apply_operator: grid mismatch");
    }
    Field out(f.grid());
    op.apply(f.values().data(), out.values().data());
    return out;
}

TensorField apply_operator(const EllipticOperator& op, const TensorField& f)
{
    if (!(op.grid() == f.grid().base())) {
        throw StructuralError("apply_operator: grid mismatch");
    }
    const std::size_t n = f.side();
    const auto& d = op.diag();
    const auto& o = op.off();
    TensorField out(f.grid());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = (d[i] + d[j]) * f(i, j);
            if (i > 0) {
                s += o[i - 1] * f(i - 1, j);
            }
            if (i + 1 < n) {
                s += o[i] * f(i + 1, j);
            }
            if (j > 0) {
                s += o[j - 1] * f(i, j - 1);
            }
            if (j + 1 < n) {
                s += o[j] * f(i, j + 1);
            }
            out(i, j) = s;
        }
    }
    out.set_symmetric(f.symmetric());
    return out;
}

} // namespace smplab
