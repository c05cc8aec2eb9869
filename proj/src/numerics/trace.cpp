#include "smplab/numerics/trace.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "smplab/error.hpp"
#include "smplab/log.hpp"

namespace smplab {

Field delta_trace(const TensorField& w)
{
    Field out(w.grid().base());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = w(i, i);
    }
    return out;
}

TensorField delta_star(const Field& f)
{
    TensorField out{Grid2D(f.grid())};
    const double ih = 1.0 / f.grid().spacing();
    for (std::size_t i = 0; i < f.size(); ++i) {
        out(i, i) = f[i] * ih;
    }
    out.set_symmetric(true);
    return out;
}

TensorField heat_mollifier(const Field& weights, double eta)
{
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw DomainError("mollifier width must be positive");
    }
    const Grid1D& g = weights.grid();
    const double h = g.spacing();
    if (eta < 4.0 * h * h) {
        std::ostringstream msg;
        msg << "mollifier width eta=" << eta << " is below the grid resolution (2h)^2=" << 4.0 * h * h;
        warn(msg.str());
    }
    const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * eta);
    TensorField out{Grid2D(g)};
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double d = g.node(i) - g.node(j);
            const double v = 0.5 * (weights[i] + weights[j]) * norm * std::exp(-d * d / (4.0 * eta));
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    out.set_symmetric(true);
    return out;
}

TensorField heat_mollifier(const Field& xbar_terminal, const std::function<double(double)>& hxx, double eta)
{
    Field w(xbar_terminal.grid());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = hxx(xbar_terminal[i]);
    }
    return heat_mollifier(w, eta);
}

} // namespace smplab
