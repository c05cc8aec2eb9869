#include "smplab/forward/expansion.hpp"

#include <cmath>

#include "smplab/error.hpp"

namespace smplab {

Eigen::VectorXd row_norms_squared(const RowMatrix& y, double h)
{
    return h * y.rowwise().squaredNorm();
}

namespace {

void keep_max(Estimate& best, const Estimate& cand, std::size_t k, std::size_t* where)
{
    if (cand.mean > best.mean || best.count == 0) {
        best = cand;
        if (where != nullptr) {
            *where = k;
        }
    }
}

Estimate estimate_of(const Eigen::VectorXd& v) { return estimate(std::span<const double>(v.data(), v.size())); }

} // namespace

ExpansionStats expansion_statistics(const Scenario& s, const StateHistory& xbar, const ControlProcess& spike,
                                    const PathEnsemble& e, double gamma)
{
    const StateHistory xeps = simulate_perturbed(s, xbar, spike, e);
    const Linearization lin(s, xbar);
    const double h = s.grid.spacing();
    const SpectralBasis basis(s.op);
    ExpansionStats st;
    st.eps = std::get<SpikeControl>(spike.representation()).eps;
    simulate_variations(lin, spike, e, [&](std::size_t k, const RowMatrix& y, const RowMatrix& z) {
        keep_max(st.y_moment, estimate_of(row_norms_squared(y, h)), k, nullptr);
        const Eigen::VectorXd zn = row_norms_squared(z, h).cwiseSqrt();
        keep_max(st.z_moment, estimate_of(zn), k, nullptr);
        const RowMatrix r = xeps.x[k] - xbar.x[k] - y - z;
        keep_max(st.residual, estimate_of(row_norms_squared(r, h)), k, &st.argmax_residual);
        if (k == s.time.n_t) {
            // Spectral coefficients per path: sqrt(h) y E.
            const Eigen::MatrixXd c = std::sqrt(h) * (y * basis.vectors());
            Eigen::VectorXd w(c.cols());
            for (Eigen::Index j = 0; j < c.cols(); ++j) {
                w[j] = std::pow(basis.eigenvalues()[j], gamma);
            }
            const Eigen::VectorXd hg = c.array().square().matrix() * w;
            st.hgamma = estimate_of(hg);
        }
    });
    return st;
}

ResidualReport residual_check(const Scenario& s, const PathEnsemble& e)
{
    if (!s.has_spike()) {
        throw ValidationError("controls.spike_v", "residual check needs a configured spike value");
    }
    const StateHistory xbar = simulate_state(s, s.reference, e);
    ResidualReport rep;
    bool all_zero = true;
    for (double frac : s.config.eps_ladder) {
        const double eps = frac * s.time.T;
        const ControlProcess spike = s.spiked(eps);
        const ExpansionStats st = expansion_statistics(s, xbar, spike, e);
        rep.eps.push_back(eps);
        rep.residual.push_back(st.residual);
        all_zero = all_zero && st.residual.mean == 0.0;
    }
    rep.identically_zero = all_zero;
    std::vector<double> m;
    std::vector<double> se;
    for (const auto& r : rep.residual) {
        m.push_back(r.mean);
        se.push_back(r.se);
    }
    rep.fit = fit_loglog(rep.eps, m, se);
    return rep;
}

} // namespace smplab
