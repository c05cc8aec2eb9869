#include "smplab/numerics/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smplab/error.hpp"

namespace smplab {

Grid1D::Grid1D(double a, double b, std::size_t n) : a_(a), b_(b), n_(n)
{
    if (n < 2) {
        throw ValidationError("grid.n", "at least 2 interior nodes required, got " + std::to_string(n));
    }
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
        throw ValidationError("grid.interval", "need finite a < b");
    }
}

Field::Field(const Grid1D& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(const Grid1D& grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size()) {
        throw StructuralError("field length " + std::to_string(values_.size()) + " does not match grid size " +
                              std::to_string(grid_.size()));
    }
}

bool Field::is_finite() const noexcept
{
    for (double v : values_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

TensorField::TensorField(const Grid2D& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

TensorField::TensorField(const Grid2D& grid, std::vector<double> values, bool symmetric)
    : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size()) {
        throw StructuralError("tensor length " + std::to_string(values_.size()) + " does not match grid size " +
                              std::to_string(grid_.size()));
    }
    set_symmetric(symmetric);
}

void TensorField::set_symmetric(bool flag)
{
    double scale = 1.0;
    for (double v : values_) {
        scale = std::max(scale, std::abs(v));
    }
    if (flag && asymmetry(values_, side()) > 1e-12 * scale) {
        throw ValidationError("tensor.symmetric", "values are not symmetric within 1e-12");
    }
    symmetric_ = flag;
}

bool TensorField::is_finite() const noexcept
{
    for (double v : values_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

TensorField TensorField::transposed() const
{
    TensorField t(grid_, 0.0);
    const std::size_t n = side();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            t(j, i) = (*this)(i, j);
        }
    }
    t.symmetric_ = symmetric_;
    return t;
}

TensorField outer(const Field& f, const Field& g)
{
    if (!(f.grid() == g.grid())) {
        throw StructuralError("outer: grid mismatch");
    }
    const std::size_t n = f.size();
    std::vector<double> w(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            w[i * n + j] = f[i] * g[j];
        }
    }
    return TensorField(Grid2D(f.grid()), std::move(w), false);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double asymmetry(std::span<const double> w, std::size_t side) noexcept
{
    double worst = 0.0;
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = i + 1; j < side; ++j) {
            worst = std::max(worst, std::abs(w[i * side + j] - w[j * side + i]));
        }
    }
    return worst;
}

double inner(const Field& f, const Field& g)
{
    if (!(f.grid() == g.grid())) {
        throw StructuralError("inner: grid mismatch");
    }
    return f.grid().spacing() * dot(f.values(), g.values());
}

double inner(const TensorField& f, const TensorField& g)
{
    if (!(f.grid() == g.grid())) {
        throw StructuralError("inner: grid mismatch");
    }
    return f.grid().cell_area() * dot(f.values(), g.values());
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double l2_norm(const TensorField& f) { return std::sqrt(inner(f, f)); }

} // namespace smplab
