#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "smplab/numerics/grid.hpp"

namespace smplab {

inline constexpr std::size_t kMaxControlDim = 4;

/// A point of the control space R^m, m <= kMaxControlDim.
struct ControlPoint {
    std::array<double, kMaxControlDim> v{};
    std::size_t dim = 1;

    ControlPoint() = default;
    explicit ControlPoint(double scalar) : dim(1) { v[0] = scalar; }
    explicit ControlPoint(std::span<const double> values);

    double operator[](std::size_t i) const noexcept { return v[i]; }
    double& operator[](std::size_t i) noexcept { return v[i]; }
    double norm() const noexcept;
    double norm_squared() const noexcept;
    bool operator==(const ControlPoint& o) const noexcept;
    std::string to_string() const;
};

/// Admissible set U: either a finite list or a box sampled on a lattice.
class ControlSet {
public:
    enum class Kind { finite, box };

    static ControlSet finite(std::vector<ControlPoint> points);
    static ControlSet box(ControlPoint lo, ControlPoint hi, std::size_t per_dim = 9);

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    const std::vector<ControlPoint>& points() const noexcept { return points_; }
    const ControlPoint& lo() const noexcept { return lo_; }
    const ControlPoint& hi() const noexcept { return hi_; }
    /// Finite: all points. Box: per_dim points per axis, endpoints included.
    std::vector<ControlPoint> lattice() const;
    bool contains(const ControlPoint& u, double tol = 1e-12) const;

private:
    Kind kind_ = Kind::finite;
    std::size_t dim_ = 1;
    std::vector<ControlPoint> points_;
    ControlPoint lo_;
    ControlPoint hi_;
    std::size_t per_dim_ = 9;
};

/// Discrete time grid t_k = k * T / n_t.
struct TimeGrid {
    double T = 1.0;
    std::size_t n_t = 64;

    double dt() const noexcept { return T / static_cast<double>(n_t); }
    double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt(); }
};

class ControlProcess;

struct DeterministicControl {
    std::vector<ControlPoint> per_step; // length n_t
};

struct SpikeControl {
    std::shared_ptr<const ControlProcess> base;
    ControlPoint v;
    double tau = 0.0;
    double eps = 0.0;
    std::size_t k_begin = 0; // first active step
    std::size_t k_end = 0;   // one past the last active step
};

/// Feedback on the spatial mean of the current state: bin b holds values
/// in [edges[b-1], edges[b]); table[k][b] is the control at step k.
struct FeedbackControl {
    std::vector<double> edges;
    std::vector<std::vector<ControlPoint>> table;
};

/// An adapted control. Every representation reads at most the state at the
/// current step; none sees noise increments.
class ControlProcess {
public:
    using Representation = std::variant<DeterministicControl, SpikeControl, FeedbackControl>;

    ControlProcess() = default;

    static ControlProcess constant(const ControlPoint& u, std::size_t n_t);
    static ControlProcess per_step(std::vector<ControlPoint> values);
    /// Piecewise constant on equal blocks; n_t must be a multiple of blocks.size().
    static ControlProcess blocks(const std::vector<ControlPoint>& values, std::size_t n_t);
    static ControlProcess feedback(std::vector<double> edges, std::vector<std::vector<ControlPoint>> table);
    /// Replaces the base by v on the steps with t_k in [tau, tau + eps).
    static ControlProcess spike(const ControlProcess& base, const ControlPoint& v, double tau, double eps,
                                const TimeGrid& time);

    const Representation& representation() const noexcept { return rep_; }
    std::size_t n_steps() const noexcept;
    /// True when the control does not depend on the state (deterministic in omega).
    bool is_deterministic() const noexcept;
    bool is_spike() const noexcept { return std::holds_alternative<SpikeControl>(rep_); }

    /// Control at step k given the current state on the path (may be empty
    /// for deterministic controls).
    ControlPoint evaluate(std::size_t k, std::span<const double> state, const Grid1D& grid) const;

    /// Spike bookkeeping; false / base for non-spike processes.
    bool spike_active(std::size_t k) const noexcept;

private:
    explicit ControlProcess(Representation rep) : rep_(std::move(rep)) {}
    Representation rep_{DeterministicControl{}};
};

/// Statistic used by feedback controls: the normalized spatial mean
/// (h sum x) / |Lambda|.
double spatial_mean(std::span<const double> state, const Grid1D& grid) noexcept;

} // namespace smplab
