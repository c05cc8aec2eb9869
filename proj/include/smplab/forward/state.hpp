#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "smplab/forward/ensemble.hpp"
#include "smplab/numerics/spectral_basis.hpp"
#include "smplab/scenario/scenario.hpp"

namespace smplab {

/// Controls actually applied, per step and (when state dependent) per path.
class AppliedControls {
public:
    AppliedControls() = default;
    AppliedControls(std::size_t n_t, std::size_t paths, bool per_path);

    bool per_path() const noexcept { return per_path_; }
    std::size_t n_t() const noexcept { return n_t_; }
    const ControlPoint& at(std::size_t k, std::size_t path) const noexcept
    {
        return values_[per_path_ ? k * paths_ + path : k];
    }
    ControlPoint& at(std::size_t k, std::size_t path) noexcept { return values_[per_path_ ? k * paths_ + path : k]; }

private:
    std::size_t n_t_ = 0;
    std::size_t paths_ = 0;
    bool per_path_ = false;
    std::vector<ControlPoint> values_;
};

/// Full trajectory of a state equation over an ensemble: x[k] is the
/// paths x n block at step k, k = 0..n_t.
struct StateHistory {
    std::vector<RowMatrix> x;
    AppliedControls u;

    std::size_t n_t() const noexcept { return x.empty() ? 0 : x.size() - 1; }
    std::size_t paths() const noexcept { return x.empty() ? 0 : static_cast<std::size_t>(x.front().rows()); }
    std::size_t n() const noexcept { return x.empty() ? 0 : static_cast<std::size_t>(x.front().cols()); }
    Field field(const Grid1D& grid, std::size_t k, std::size_t path) const;
};

/// Control of path p at the current step.
using ControlAt = std::function<const ControlPoint&(std::size_t path)>;

/// out(p, i) = f(x(p, i), u(p)).
void eval_block(const DriftMap& f, const RowMatrix& x, const ControlAt& u, RowMatrix& out);
/// out(p, i) = f(x(p, i), u(p), m) * g_m(i).
void eval_noise_block(const NoiseMap& f, const NoiseModel& noise, std::size_t m, const RowMatrix& x,
                      const ControlAt& u, RowMatrix& out);

/// Semi-implicit Euler-Maruyama:
///   (I - dt A) x_{k+1} = x_k + dt b(x_k, u_k) + sum_m sigma_m(x_k, u_k) dW_k^m.
/// Throws BlowUpError carrying the step when values stop being finite.
StateHistory simulate_state(const Scenario& s, const ControlProcess& u, const PathEnsemble& e);

/// The spike-perturbed state x^eps on the same noise as xbar. The applied
/// control equals the realized reference control of xbar off the spike
/// window and v on it.
StateHistory simulate_perturbed(const Scenario& s, const StateHistory& xbar, const ControlProcess& spike,
                                const PathEnsemble& e);

/// u^eps on path p at step k given the realized reference controls.
const ControlPoint& perturbed_control(const ControlProcess& spike, const StateHistory& xbar, std::size_t k,
                                      std::size_t path) noexcept;

/// Throws BlowUpError when the block contains a non-finite value.
void check_finite(const RowMatrix& block, std::size_t step, const char* what);

/// Binary trajectory dump of one path:
///   "SMPLTRJ1", then uint64 n, n_t, K, kind (1 field, 2 tensor), control dim,
///   then (n_t+1) blocks of n (or n*n) doubles, then n_t control points of
///   control-dim doubles. Little endian.
void write_trajectory(std::ostream& os, const std::vector<std::vector<double>>& steps, std::size_t n,
                      std::size_t K, bool tensor, const std::vector<ControlPoint>& controls);

struct TrajectoryDump {
    std::size_t n = 0;
    std::size_t n_t = 0;
    std::size_t K = 0;
    bool tensor = false;
    std::vector<std::vector<double>> steps;
    std::vector<ControlPoint> controls;
};
TrajectoryDump read_trajectory(std::istream& is);

} // namespace smplab
