#include "smplab/scenario/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smplab/error.hpp"

namespace smplab {

namespace {

const std::map<std::string, ParameterMap>& drift_table()
{
    static const std::map<std::string, ParameterMap> table = {
        {"additive", {{"beta", 0.5}, {"kappa", 1.0}, {"s0", 0.3}, {"s1", 0.2}, {"bx_fault", 0.0}}},
        {"bilinear", {{"beta", 0.5}, {"kappa", 1.0}, {"s", 0.4}, {"bx_fault", 0.0}}},
        {"logistic-drift", {{"c1", 1.0}, {"kappa", 1.0}, {"s", 0.3}, {"s_u", 0.3}, {"bx_fault", 0.0}}},
    };
    return table;
}

const std::map<std::string, ParameterMap>& cost_table()
{
    static const std::map<std::string, ParameterMap> table = {
        {"quadratic-cost", {{"x_ref", 0.0}, {"x_target", 0.0}, {"r", 0.1}, {"w_run", 1.0}, {"w_T", 1.0}}},
        {"constant", {{"c_l", 1.0}, {"c_h", 0.0}}},
        {"none", {}},
    };
    return table;
}

// Mode m carries weight 1/(m+1) so the truncated noise has a decaying spectrum.
double mode_weight(std::size_t m) { return 1.0 / static_cast<double>(m + 1); }

std::vector<std::string> keys_of(const std::map<std::string, ParameterMap>& t)
{
    std::vector<std::string> out;
    for (const auto& [k, _] : t) {
        out.push_back(k);
    }
    return out;
}

} // namespace

const ParameterMap& drift_preset_defaults(const std::string& preset)
{
    const auto it = drift_table().find(preset);
    if (it == drift_table().end()) {
        throw ValidationError("coefficients.drift", "unknown drift preset '" + preset + "'");
    }
    return it->second;
}

const ParameterMap& cost_preset_defaults(const std::string& preset)
{
    const auto it = cost_table().find(preset);
    if (it == cost_table().end()) {
        throw ValidationError("coefficients.cost", "unknown cost preset '" + preset + "'");
    }
    return it->second;
}

std::vector<std::string> drift_preset_names() { return keys_of(drift_table()); }
std::vector<std::string> cost_preset_names() { return keys_of(cost_table()); }

CoefficientSet make_coefficients(const std::string& drift, const std::string& cost, const ParameterMap& params,
                                 std::size_t K)
{
    if (K < 1) {
        throw ValidationError("noise.K", "at least one noise mode is required");
    }
    ParameterMap dp = drift_preset_defaults(drift);
    ParameterMap cp = cost_preset_defaults(cost);
    for (const auto& [name, value] : params) {
        if (dp.count(name) != 0) {
            dp[name] = value;
        } else if (cp.count(name) != 0) {
            cp[name] = value;
        } else {
            throw ValidationError("coefficients.parameter",
                                  "parameter '" + name + "' is not used by presets '" + drift + "' / '" + cost + "'");
        }
    }

    CoefficientSet c;
    c.drift_preset = drift;
    c.cost_preset = cost;
    c.K = K;
    const double fault = dp.at("bx_fault");

    if (drift == "additive") {
        const double beta = dp.at("beta");
        const double kappa = dp.at("kappa");
        const double s0 = dp.at("s0");
        const double s1 = dp.at("s1");
        c.b = [=](double x, const ControlPoint& u) { return beta * x + kappa * u[0]; };
        c.b_x = [=](double, const ControlPoint&) { return beta + fault; };
        c.b_xx = [](double, const ControlPoint&) { return 0.0; };
        c.sigma = [=](double, const ControlPoint& u, std::size_t m) { return (s0 + s1 * u[0]) * mode_weight(m); };
        c.sigma_x = [](double, const ControlPoint&, std::size_t) { return 0.0; };
        c.sigma_xx = [](double, const ControlPoint&, std::size_t) { return 0.0; };
        c.sigma_x_vanishes = true;
        c.sigma_u_independent = s1 == 0.0;
    } else if (drift == "bilinear") {
        const double beta = dp.at("beta");
        const double kappa = dp.at("kappa");
        const double s = dp.at("s");
        c.b = [=](double x, const ControlPoint& u) { return beta * x + kappa * u[0]; };
        c.b_x = [=](double, const ControlPoint&) { return beta + fault; };
        c.b_xx = [](double, const ControlPoint&) { return 0.0; };
        c.sigma = [=](double x, const ControlPoint& u, std::size_t m) { return s * u[0] * x * mode_weight(m); };
        c.sigma_x = [=](double, const ControlPoint& u, std::size_t m) { return s * u[0] * mode_weight(m); };
        c.sigma_xx = [](double, const ControlPoint&, std::size_t) { return 0.0; };
        c.sigma_x_vanishes = s == 0.0;
        c.sigma_u_independent = s == 0.0;
    } else {
        const double c1 = dp.at("c1");
        const double kappa = dp.at("kappa");
        const double s = dp.at("s");
        const double su = dp.at("s_u");
        c.b = [=](double x, const ControlPoint& u) { return c1 * x * (1.0 - x) + kappa * u[0]; };
        c.b_x = [=](double x, const ControlPoint&) { return c1 * (1.0 - 2.0 * x) + fault; };
        c.b_xx = [=](double, const ControlPoint&) { return -2.0 * c1; };
        c.sigma = [=](double x, const ControlPoint& u, std::size_t m) { return (s * x + su * u[0]) * mode_weight(m); };
        c.sigma_x = [=](double, const ControlPoint&, std::size_t m) { return s * mode_weight(m); };
        c.sigma_xx = [](double, const ControlPoint&, std::size_t) { return 0.0; };
        c.sigma_x_vanishes = s == 0.0;
        c.sigma_u_independent = su == 0.0;
    }

    if (cost == "quadratic-cost") {
        const double xr = cp.at("x_ref");
        const double xt = cp.at("x_target");
        const double r = cp.at("r");
        const double wr = cp.at("w_run");
        const double wt = cp.at("w_T");
        c.l = [=](double x, const ControlPoint& u) { return 0.5 * wr * (x - xr) * (x - xr) + r * u.norm_squared(); };
        c.l_x = [=](double x, const ControlPoint&) { return wr * (x - xr); };
        c.l_xx = [=](double, const ControlPoint&) { return wr; };
        c.h = [=](double x) { return 0.5 * wt * (x - xt) * (x - xt); };
        c.h_x = [=](double x) { return wt * (x - xt); };
        c.h_xx = [=](double) { return wt; };
    } else if (cost == "constant") {
        const double cl = cp.at("c_l");
        const double ch = cp.at("c_h");
        c.l = [=](double, const ControlPoint&) { return cl; };
        c.l_x = [](double, const ControlPoint&) { return 0.0; };
        c.l_xx = [](double, const ControlPoint&) { return 0.0; };
        c.h = [=](double) { return ch; };
        c.h_x = [](double) { return 0.0; };
        c.h_xx = [](double) { return 0.0; };
    } else {
        c.l = [](double, const ControlPoint&) { return 0.0; };
        c.l_x = c.l;
        c.l_xx = c.l;
        c.h = [](double) { return 0.0; };
        c.h_x = c.h;
        c.h_xx = c.h;
    }
    return c;
}

CoefficientCheck check_coefficients(const CoefficientSet& c, const std::vector<ControlPoint>& controls, double x_box)
{
    constexpr double delta = 1e-4;
    constexpr double tol = 1e-5;
    constexpr int nx = 41;
    CoefficientCheck out;

    auto record = [&](const char* name, double fd, double d) {
        const double dev = std::abs(fd - d) / std::max(1.0, std::abs(d));
        if (!std::isfinite(fd) || !std::isfinite(d)) {
            throw ValidationError("coefficients.finite", std::string("non-finite value in ") + name);
        }
        if (dev > out.max_relative_deviation || out.worst_pair.empty()) {
            out.max_relative_deviation = dev;
            out.worst_pair = name;
        }
        ++out.samples;
    };
    auto bound = [&](double v) { out.derivative_bound = std::max(out.derivative_bound, std::abs(v)); };

    for (int ix = 0; ix < nx; ++ix) {
        const double x = -x_box + 2.0 * x_box * ix / (nx - 1);
        record("h/h_x", (c.h(x + delta) - c.h(x - delta)) / (2 * delta), c.h_x(x));
        record("h_x/h_xx", (c.h_x(x + delta) - c.h_x(x - delta)) / (2 * delta), c.h_xx(x));
        bound(c.h_xx(x));
        for (const auto& u : controls) {
            const double scale = 1.0 + std::abs(x) + u.norm();
            record("b/b_x", (c.b(x + delta, u) - c.b(x - delta, u)) / (2 * delta), c.b_x(x, u));
            record("b_x/b_xx", (c.b_x(x + delta, u) - c.b_x(x - delta, u)) / (2 * delta), c.b_xx(x, u));
            record("l/l_x", (c.l(x + delta, u) - c.l(x - delta, u)) / (2 * delta), c.l_x(x, u));
            record("l_x/l_xx", (c.l_x(x + delta, u) - c.l_x(x - delta, u)) / (2 * delta), c.l_xx(x, u));
            out.growth_constant = std::max(out.growth_constant, std::abs(c.b(x, u)) / scale);
            bound(c.b_x(x, u));
            bound(c.b_xx(x, u));
            bound(c.l_xx(x, u));
            for (std::size_t m = 0; m < c.K; ++m) {
                record("sigma/sigma_x", (c.sigma(x + delta, u, m) - c.sigma(x - delta, u, m)) / (2 * delta),
                       c.sigma_x(x, u, m));
                record("sigma_x/sigma_xx", (c.sigma_x(x + delta, u, m) - c.sigma_x(x - delta, u, m)) / (2 * delta),
                       c.sigma_xx(x, u, m));
                out.growth_constant = std::max(out.growth_constant, std::abs(c.sigma(x, u, m)) / scale);
                bound(c.sigma_x(x, u, m));
                bound(c.sigma_xx(x, u, m));
            }
        }
    }
    if (out.max_relative_deviation > tol) {
        std::ostringstream msg;
        msg << "derivative mismatch in pair " << out.worst_pair << ": max relative deviation "
            << out.max_relative_deviation << " exceeds " << tol;
        throw ValidationError("coefficients.derivative_consistency", msg.str());
    }
    if (!std::isfinite(out.growth_constant) || !std::isfinite(out.derivative_bound)) {
        throw ValidationError("coefficients.growth", "coefficient growth is not finite on the sampled box");
    }
    return out;
}

Field eval_coefficient(const CoefficientSet& c, CoefTag which, const Field& x, const ControlPoint& u)
{
    Field out(x.grid());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        double v = 0.0;
        switch (which) {
        case CoefTag::b: v = c.b(xi, u); break;
        case CoefTag::b_x: v = c.b_x(xi, u); break;
        case CoefTag::b_xx: v = c.b_xx(xi, u); break;
        case CoefTag::l: v = c.l(xi, u); break;
        case CoefTag::l_x: v = c.l_x(xi, u); break;
        case CoefTag::l_xx: v = c.l_xx(xi, u); break;
        case CoefTag::h: v = c.h(xi); break;
        case CoefTag::h_x: v = c.h_x(xi); break;
        case CoefTag::h_xx: v = c.h_xx(xi); break;
        default: throw StructuralError("eval_coefficient: noise tags return one field per mode");
        }
        out[i] = v;
    }
    return out;
}

std::vector<Field> eval_noise_coefficient(const CoefficientSet& c, const NoiseModel& noise, CoefTag which,
                                          const Field& x, const ControlPoint& u)
{
    const NoiseMap* f = nullptr;
    switch (which) {
    case CoefTag::sigma: f = &c.sigma; break;
    case CoefTag::sigma_x: f = &c.sigma_x; break;
    case CoefTag::sigma_xx: f = &c.sigma_xx; break;
    default: throw StructuralError("eval_noise_coefficient: not a noise tag");
    }
    std::vector<Field> out;
    out.reserve(c.K);
    for (std::size_t m = 0; m < c.K; ++m) {
        Field fm(x.grid());
        for (std::size_t i = 0; i < x.size(); ++i) {
            fm[i] = (*f)(x[i], u, m) * noise.profile(m, i);
        }
        out.push_back(std::move(fm));
    }
    return out;
}

} // namespace smplab
