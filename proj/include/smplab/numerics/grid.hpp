#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace smplab {

/// Uniform grid of interior nodes on a bounded interval with homogeneous
/// Dirichlet data. Node j sits at a + (j+1)h; boundary values are zero and
/// never stored.
class Grid1D {
public:
    Grid1D() = default;
    Grid1D(double a, double b, std::size_t n);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    std::size_t size() const noexcept { return n_; }
    double length() const noexcept { return b_ - a_; }
    double spacing() const noexcept { return (b_ - a_) / static_cast<double>(n_ + 1); }
    double node(std::size_t j) const noexcept { return a_ + static_cast<double>(j + 1) * spacing(); }

    bool operator==(const Grid1D&) const = default;

private:
    double a_ = 0.0;
    double b_ = 1.0;
    std::size_t n_ = 2;
};

/// Product grid base x base. Node (i, j) is (lambda_i, mu_j); storage is
/// row-major over i then j.
class Grid2D {
public:
    Grid2D() = default;
    explicit Grid2D(Grid1D base) : base_(base) {}

    const Grid1D& base() const noexcept { return base_; }
    std::size_t side() const noexcept { return base_.size(); }
    std::size_t size() const noexcept { return base_.size() * base_.size(); }
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * side() + j; }
    double cell_area() const noexcept { return base_.spacing() * base_.spacing(); }

    bool operator==(const Grid2D&) const = default;

private:
    Grid1D base_;
};

/// Real function on the interior nodes of a Grid1D.
class Field {
public:
    Field() = default;
    explicit Field(const Grid1D& grid, double fill = 0.0);
    Field(const Grid1D& grid, std::vector<double> values);

    const Grid1D& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    bool is_finite() const noexcept;

private:
    Grid1D grid_;
    std::vector<double> values_;
};

/// Real function on the interior nodes of a Grid2D. The symmetric flag is a
/// claim checked on construction to 1e-12 (relative to max(1, max abs));
/// filled tensors start without it since their values are writable.
class TensorField {
public:
    TensorField() = default;
    explicit TensorField(const Grid2D& grid, double fill = 0.0);
    TensorField(const Grid2D& grid, std::vector<double> values, bool symmetric = false);

    const Grid2D& grid() const noexcept { return grid_; }
    std::size_t side() const noexcept { return grid_.side(); }
    std::size_t size() const noexcept { return values_.size(); }
    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[grid_.index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[grid_.index(i, j)]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    bool symmetric() const noexcept { return symmetric_; }
    void set_symmetric(bool flag);
    bool is_finite() const noexcept;
    TensorField transposed() const;

private:
    Grid2D grid_;
    std::vector<double> values_;
    bool symmetric_ = false;
};

/// f (x) g on the product grid.
TensorField outer(const Field& f, const Field& g);

/// Quadrature inner products: weight h on the line, h^2 on the square.
double inner(const Field& f, const Field& g);
double inner(const TensorField& f, const TensorField& g);
double l2_norm(const Field& f);
double l2_norm(const TensorField& f);

/// Raw-span variants used by the simulators (weights supplied by caller).
double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// Largest |w(i,j) - w(j,i)| over the square.
double asymmetry(std::span<const double> w, std::size_t side) noexcept;

} // namespace smplab
