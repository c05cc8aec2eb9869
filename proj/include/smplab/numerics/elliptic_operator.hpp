#pragma once

#include <functional>
#include <vector>

#include "smplab/numerics/grid.hpp"

namespace smplab {

enum class OperatorKind { laplacian, divergence_form };

const char* to_string(OperatorKind kind) noexcept;

/// Discrete Dirichlet operator A = d/dl (a(l) d/dl) on the interior nodes.
/// The coefficient is sampled at the n+1 cell midpoints a_{i+1/2}; entry m
/// sits between node m-1 and node m (node -1 and node n are the boundary).
class EllipticOperator {
public:
    EllipticOperator() = default;

    static EllipticOperator laplacian(const Grid1D& grid);
    static EllipticOperator divergence_form(const Grid1D& grid, std::vector<double> a_mid, double a0);
    static EllipticOperator divergence_form(const Grid1D& grid, const std::function<double(double)>& a, double a0);

    OperatorKind kind() const noexcept { return kind_; }
    const Grid1D& grid() const noexcept { return grid_; }
    const std::vector<double>& a_mid() const noexcept { return a_mid_; }

    /// Tridiagonal entries of A: diag has n entries, off has n-1 (A is symmetric).
    const std::vector<double>& diag() const noexcept { return diag_; }
    const std::vector<double>& off() const noexcept { return off_; }

    /// out = A f for a contiguous block of values on the grid (no checks).
    void apply(const double* f, double* out) const noexcept;

private:
    EllipticOperator(OperatorKind kind, const Grid1D& grid, std::vector<double> a_mid);

    OperatorKind kind_ = OperatorKind::laplacian;
    Grid1D grid_;
    std::vector<double> a_mid_;
    std::vector<double> diag_;
    std::vector<double> off_;
};

/// A f on the line; on the square the Kronecker sum A_l + A_m.
Field apply_operator(const EllipticOperator& op, const Field& f);
TensorField apply_operator(const EllipticOperator& op, const TensorField& f);

} // namespace smplab
