#include "smplab/forward/cost.hpp"

namespace smplab {

double integrate_nodal(std::span<const double> values, double boundary_value, double h) noexcept
{
    double s = boundary_value;
    for (double v : values) {
        s += v;
    }
    return h * s;
}

std::vector<double> path_costs(const Scenario& s, const StateHistory& hist)
{
    const std::size_t M = hist.paths();
    const std::size_t n = hist.n();
    const double h = s.grid.spacing();
    const double dt = s.dt();
    const auto& c = s.coeffs;
    std::vector<double> out(M, 0.0);
    std::vector<double> row(n);
#pragma omp parallel for schedule(static) firstprivate(row)
    for (std::size_t p = 0; p < M; ++p) {
        const auto ip = static_cast<Eigen::Index>(p);
        double total = 0.0;
        for (std::size_t k = 0; k < hist.n_t(); ++k) {
            const ControlPoint& u = hist.u.at(k, p);
            for (std::size_t i = 0; i < n; ++i) {
                row[i] = c.l(hist.x[k](ip, static_cast<Eigen::Index>(i)), u);
            }
            total += dt * integrate_nodal(row, c.l(0.0, u), h);
        }
        const RowMatrix& xT = hist.x.back();
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = c.h(xT(ip, static_cast<Eigen::Index>(i)));
        }
        total += integrate_nodal(row, c.h(0.0), h);
        out[p] = total;
    }
    return out;
}

Estimate cost(const Scenario& s, const StateHistory& hist)
{
    const auto v = path_costs(s, hist);
    return estimate(v);
}

} // namespace smplab
