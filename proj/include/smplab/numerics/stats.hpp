#pragma once

#include <span>

namespace smplab {

/// Sample mean with its standard error (sample standard deviation / sqrt(M)).
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

/// Fixed-order reduction, so results are reproducible bit for bit.
Estimate estimate(std::span<const double> samples);

/// Estimate of mean(a - b) over paired samples.
Estimate paired_difference(std::span<const double> a, std::span<const double> b);

} // namespace smplab

namespace smplab {

/// Least-squares line through (log x, log y) with a 95% interval from the
/// Student t distribution. The slope standard error is the larger of the
/// residual-based value and the one propagated from the per-point standard
/// errors. Undefined when fewer than 3 points or any y <= 0.
struct SlopeFit {
    bool defined = false;
    double slope = 0.0;
    double intercept = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y, std::span<const double> y_se);

} // namespace smplab
