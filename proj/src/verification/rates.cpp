#include "smplab/verification/rates.hpp"

#include <cmath>

#include "smplab/error.hpp"

namespace smplab {

const char* to_string(RateKind kind) noexcept
{
    switch (kind) {
    case RateKind::y_moment:
        return "y_moment";
    case RateKind::z_moment:
        return "z_moment";
    case RateKind::residual:
        return "residual";
    case RateKind::hgamma:
        return "hgamma";
    }
    return "?";
}

RateKind parse_rate_kind(const std::string& name)
{
    for (const RateKind k : {RateKind::y_moment, RateKind::z_moment, RateKind::residual, RateKind::hgamma}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    throw ValidationError("rates.kind", "unknown statistic '" + name +
                                            "' (expected y_moment, z_moment, residual or hgamma)");
}

double rate_threshold(RateKind kind) noexcept
{
    return kind == RateKind::residual ? 2.2 : 0.9;
}

std::vector<RateReport> rate_suite(const Scenario& s, const PathEnsemble& e, double gamma)
{
    if (!s.has_spike()) {
        throw ValidationError("controls.spike_v", "rate experiments need a configured spike value");
    }
    const auto& ladder = s.config.eps_ladder;
    if (ladder.size() < 4) {
        throw ValidationError("run.eps_ladder", "at least 4 spike lengths are needed");
    }
    const double dt = s.dt();
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (i > 0 && !(ladder[i] < ladder[i - 1])) {
            throw ValidationError("run.eps_ladder", "spike lengths must be strictly decreasing");
        }
        const double steps = ladder[i] * s.time.T / dt;
        if (!(steps >= 1.0 - 1e-9) || std::abs(steps - std::round(steps)) > 1e-9) {
            throw ValidationError("run.eps_ladder", "every spike length must be a positive multiple of dt");
        }
    }
    if (!(s.config.spike_tau + ladder.front() * s.time.T < s.time.T)) {
        throw ValidationError("controls.spike_tau", "tau + max eps must stay below T");
    }

    const StateHistory xbar = simulate_state(s, s.reference, e);
    std::vector<ExpansionStats> stats;
    for (const double frac : ladder) {
        stats.push_back(expansion_statistics(s, xbar, s.spiked(frac * s.time.T), e, gamma));
    }
    std::vector<RateReport> out;
    for (const RateKind kind : {RateKind::y_moment, RateKind::z_moment, RateKind::residual, RateKind::hgamma}) {
        RateReport r;
        r.kind = kind;
        r.threshold = rate_threshold(kind);
        std::vector<double> mean;
        std::vector<double> se;
        bool zero = true;
        for (const ExpansionStats& st : stats) {
            const Estimate& v = kind == RateKind::y_moment   ? st.y_moment
                                : kind == RateKind::z_moment ? st.z_moment
                                : kind == RateKind::residual ? st.residual
                                                             : st.hgamma;
            r.eps.push_back(st.eps);
            r.values.push_back(v);
            mean.push_back(v.mean);
            se.push_back(v.se);
            zero = zero && v.mean == 0.0;
        }
        r.identically_zero = zero;
        if (!zero) {
            r.fit = fit_loglog(r.eps, mean, se);
        }
        r.pass = r.fit.defined && r.fit.slope >= r.threshold && r.fit.ci_low > 0.0;
        out.push_back(std::move(r));
    }
    return out;
}

RateReport rate_experiment(RateKind kind, const Scenario& s, const PathEnsemble& e, double gamma)
{
    for (RateReport& r : rate_suite(s, e, gamma)) {
        if (r.kind == kind) {
            return std::move(r);
        }
    }
    throw StructuralError("rate kind missing from the suite");
}

} // namespace smplab
