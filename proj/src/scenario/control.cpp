#include "smplab/scenario/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smplab/error.hpp"
#include "smplab/numerics/field_io.hpp"

namespace smplab {

ControlPoint::ControlPoint(std::span<const double> values)
{
    if (values.empty() || values.size() > kMaxControlDim) {
        throw ValidationError("controls.dim", "control dimension must be between 1 and " +
                                                  std::to_string(kMaxControlDim));
    }
    dim = values.size();
    std::copy(values.begin(), values.end(), v.begin());
}

double ControlPoint::norm_squared() const noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        s += v[i] * v[i];
    }
    return s;
}

double ControlPoint::norm() const noexcept { return std::sqrt(norm_squared()); }

bool ControlPoint::operator==(const ControlPoint& o) const noexcept
{
    if (dim != o.dim) {
        return false;
    }
    for (std::size_t i = 0; i < dim; ++i) {
        if (v[i] != o.v[i]) {
            return false;
        }
    }
    return true;
}

std::string ControlPoint::to_string() const
{
    std::string s;
    for (std::size_t i = 0; i < dim; ++i) {
        if (i > 0) {
            s += ' ';
        }
        s += format_double(v[i]);
    }
    return s;
}

ControlSet ControlSet::finite(std::vector<ControlPoint> points)
{
    if (points.empty()) {
        throw ValidationError("controls.nonempty", "finite control set has no points");
    }
    ControlSet s;
    s.kind_ = Kind::finite;
    s.dim_ = points.front().dim;
    for (const auto& p : points) {
        if (p.dim != s.dim_) {
            throw ValidationError("controls.dim", "control points have mixed dimensions");
        }
    }
    s.points_ = std::move(points);
    return s;
}

ControlSet ControlSet::box(ControlPoint lo, ControlPoint hi, std::size_t per_dim)
{
    if (lo.dim != hi.dim) {
        throw ValidationError("controls.dim", "box corners have different dimensions");
    }
    for (std::size_t i = 0; i < lo.dim; ++i) {
        if (!(lo[i] <= hi[i])) {
            throw ValidationError("controls.nonempty", "box has lo > hi in coordinate " + std::to_string(i));
        }
    }
    if (per_dim < 2) {
        throw ValidationError("controls.lattice", "box lattice needs at least 2 points per dimension");
    }
    ControlSet s;
    s.kind_ = Kind::box;
    s.dim_ = lo.dim;
    s.lo_ = lo;
    s.hi_ = hi;
    s.per_dim_ = per_dim;
    return s;
}

std::vector<ControlPoint> ControlSet::lattice() const
{
    if (kind_ == Kind::finite) {
        return points_;
    }
    std::size_t total = 1;
    for (std::size_t i = 0; i < dim_; ++i) {
        total *= per_dim_;
    }
    std::vector<ControlPoint> out;
    out.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        ControlPoint p;
        p.dim = dim_;
        std::size_t rem = idx;
        for (std::size_t i = 0; i < dim_; ++i) {
            const std::size_t c = rem % per_dim_;
            rem /= per_dim_;
            p[i] = lo_[i] + (hi_[i] - lo_[i]) * static_cast<double>(c) / static_cast<double>(per_dim_ - 1);
        }
        out.push_back(p);
    }
    return out;
}

bool ControlSet::contains(const ControlPoint& u, double tol) const
{
    if (u.dim != dim_) {
        return false;
    }
    if (kind_ == Kind::finite) {
        return std::any_of(points_.begin(), points_.end(), [&](const ControlPoint& p) {
            for (std::size_t i = 0; i < dim_; ++i) {
                if (std::abs(p[i] - u[i]) > tol) {
                    return false;
                }
            }
            return true;
        });
    }
    for (std::size_t i = 0; i < dim_; ++i) {
        if (u[i] < lo_[i] - tol || u[i] > hi_[i] + tol) {
            return false;
        }
    }
    return true;
}

ControlProcess ControlProcess::constant(const ControlPoint& u, std::size_t n_t)
{
    return ControlProcess(DeterministicControl{std::vector<ControlPoint>(n_t, u)});
}

ControlProcess ControlProcess::per_step(std::vector<ControlPoint> values)
{
    if (values.empty()) {
        throw ValidationError("control.steps", "control needs at least one step");
    }
    return ControlProcess(DeterministicControl{std::move(values)});
}

ControlProcess ControlProcess::blocks(const std::vector<ControlPoint>& values, std::size_t n_t)
{
    if (values.empty() || n_t % values.size() != 0) {
        throw ValidationError("control.blocks", "n_t=" + std::to_string(n_t) + " is not a multiple of the block count " +
                                                    std::to_string(values.size()));
    }
    const std::size_t per = n_t / values.size();
    std::vector<ControlPoint> steps;
    steps.reserve(n_t);
    for (const auto& v : values) {
        steps.insert(steps.end(), per, v);
    }
    return ControlProcess(DeterministicControl{std::move(steps)});
}

ControlProcess ControlProcess::feedback(std::vector<double> edges, std::vector<std::vector<ControlPoint>> table)
{
    if (table.empty()) {
        throw ValidationError("control.feedback", "feedback table is empty");
    }
    if (!std::is_sorted(edges.begin(), edges.end())) {
        throw ValidationError("control.feedback", "bin edges must be sorted");
    }
    for (const auto& row : table) {
        if (row.size() != edges.size() + 1) {
            throw ValidationError("control.feedback", "each table row needs one entry per bin");
        }
    }
    return ControlProcess(FeedbackControl{std::move(edges), std::move(table)});
}

ControlProcess ControlProcess::spike(const ControlProcess& base, const ControlPoint& v, double tau, double eps,
                                     const TimeGrid& time)
{
    if (!(tau > 0.0) || !(eps >= 0.0) || tau + eps > time.T * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "spike needs 0 < tau and tau + eps <= T (tau=" << tau << ", eps=" << eps << ", T=" << time.T << ")";
        throw ValidationError("spike.interval", msg.str());
    }
    // Step k is active when tau <= t_k < tau + eps; the tolerance absorbs
    // representation error when tau and eps are multiples of dt.
    const double dt = time.dt();
    const double tol = 1e-9;
    auto first_at_or_after = [&](double t) {
        return static_cast<std::size_t>(std::max(0.0, std::ceil(t / dt - tol)));
    };
    SpikeControl s;
    s.base = std::make_shared<const ControlProcess>(base);
    s.v = v;
    s.tau = tau;
    s.eps = eps;
    s.k_begin = std::min(first_at_or_after(tau), time.n_t);
    s.k_end = eps > 0.0 ? std::min(first_at_or_after(tau + eps), time.n_t) : s.k_begin;
    return ControlProcess(std::move(s));
}

std::size_t ControlProcess::n_steps() const noexcept
{
    return std::visit(
        [](const auto& r) -> std::size_t {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, DeterministicControl>) {
                return r.per_step.size();
            } else if constexpr (std::is_same_v<T, SpikeControl>) {
                return r.base->n_steps();
            } else {
                return r.table.size();
            }
        },
        rep_);
}

bool ControlProcess::is_deterministic() const noexcept
{
    if (const auto* s = std::get_if<SpikeControl>(&rep_)) {
        return s->base->is_deterministic();
    }
    return std::holds_alternative<DeterministicControl>(rep_);
}

bool ControlProcess::spike_active(std::size_t k) const noexcept
{
    const auto* s = std::get_if<SpikeControl>(&rep_);
    return s != nullptr && k >= s->k_begin && k < s->k_end;
}

double spatial_mean(std::span<const double> state, const Grid1D& grid) noexcept
{
    double s = 0.0;
    for (double v : state) {
        s += v;
    }
    return s * grid.spacing() / grid.length();
}

ControlPoint ControlProcess::evaluate(std::size_t k, std::span<const double> state, const Grid1D& grid) const
{
    if (k >= n_steps()) {
        throw StructuralError("control evaluated at step " + std::to_string(k) + " beyond its " +
                              std::to_string(n_steps()) + " steps");
    }
    return std::visit(
        [&](const auto& r) -> ControlPoint {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, DeterministicControl>) {
                return r.per_step[k];
            } else if constexpr (std::is_same_v<T, SpikeControl>) {
                return (k >= r.k_begin && k < r.k_end) ? r.v : r.base->evaluate(k, state, grid);
            } else {
                const auto& row = r.table[k];
                if (row.size() == 1) {
                    return row[0];
                }
                const double m = spatial_mean(state, grid);
                const auto bin = static_cast<std::size_t>(std::upper_bound(r.edges.begin(), r.edges.end(), m) -
                                                          r.edges.begin());
                return row[bin];
            }
        },
        rep_);
}

} // namespace smplab
