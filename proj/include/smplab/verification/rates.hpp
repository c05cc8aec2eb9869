#pragma once

#include <string>
#include <vector>

#include "smplab/forward/expansion.hpp"

namespace smplab {

enum class RateKind { y_moment, z_moment, residual, hgamma };

const char* to_string(RateKind kind) noexcept;
/// Throws ValidationError ("rates.kind") for unknown names.
RateKind parse_rate_kind(const std::string& name);
/// Minimum accepted log-log slope: 0.9, 0.9, 2.2, 0.9.
double rate_threshold(RateKind kind) noexcept;

/// Statistic of one kind along the spike-length ladder with its fitted
/// log-log slope. When every value vanishes the slope is undefined and the
/// report says so; such a report is not a failure.
struct RateReport {
    RateKind kind = RateKind::y_moment;
    std::vector<double> eps;
    std::vector<Estimate> values;
    SlopeFit fit;
    bool identically_zero = false;
    double threshold = 0.0;
    /// slope >= threshold and the 95% interval excludes 0.
    bool pass = false;
};

/// Runs the configured ladder (eps = eps_ladder * T, spike at spike_tau with
/// spike_v) once and fits all four statistics. The ladder must be strictly
/// decreasing with at least 4 points, each eps an integer multiple of dt and
/// tau + max eps < T.
std::vector<RateReport> rate_suite(const Scenario& s, const PathEnsemble& e, double gamma = 0.25);
RateReport rate_experiment(RateKind kind, const Scenario& s, const PathEnsemble& e, double gamma = 0.25);

} // namespace smplab
