#include "smplab/numerics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "smplab/error.hpp"

namespace smplab {

Estimate estimate(std::span<const double> samples)
{
    Estimate e;
    e.count = samples.size();
    if (samples.empty()) {
        return e;
    }
    // Shift by the first sample: identical samples give their value exactly.
    const double x0 = samples[0];
    double s = 0.0;
    for (double v : samples) {
        s += v - x0;
    }
    const double n = static_cast<double>(samples.size());
    const double shifted_mean = s / n;
    e.mean = x0 + shifted_mean;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double v : samples) {
            const double d = (v - x0) - shifted_mean;
            ss += d * d;
        }
        e.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

Estimate paired_difference(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw StructuralError("paired_difference: sample counts differ");
    }
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[i] = a[i] - b[i];
    }
    return estimate(d);
}

} // namespace smplab


namespace smplab {

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y, std::span<const double> y_se)
{
    SlopeFit fit;
    const std::size_t n = x.size();
    if (n < 3 || y.size() != n || y_se.size() != n) {
        return fit;
    }
    std::vector<double> lx(n);
    std::vector<double> ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            return fit;
        }
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) {
        return fit;
    }
    fit.defined = true;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    double propagated = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        rss += r * r;
        const double w = (lx[i] - mx) / sxx;
        const double rel = y_se[i] / y[i];
        propagated += w * w * rel * rel;
    }
    const double dof = static_cast<double>(n - 2);
    const double residual_se = std::sqrt(rss / dof / sxx);
    fit.se = std::max(residual_se, std::sqrt(propagated));
    const boost::math::students_t dist(dof);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.ci_low = fit.slope - t * fit.se;
    fit.ci_high = fit.slope + t * fit.se;
    return fit;
}

} // namespace smplab
