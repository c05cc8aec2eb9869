#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "smplab/error.hpp"
#include "smplab/scenario/scenario.hpp"

using namespace smplab;

namespace {

ScenarioConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

Scenario build(const std::string& text) { return build_scenario(parse(text)); }

template <class F>
std::string invariant_of(F&& f)
{
    try {
        f();
    } catch (const ValidationError& e) {
        return e.invariant();
    }
    return "<none>";
}

template <class F>
std::size_t parse_error_line(F&& f)
{
    try {
        f();
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

} // namespace

TEST_CASE("defaults build a valid scenario")
{
    const Scenario s = build("");
    CHECK(s.n() == 16);
    CHECK(s.K() == 1);
    CHECK(s.time.n_t == 64);
    CHECK(s.dt() == doctest::Approx(1.0 / 64));
    CHECK(s.grid.length() == doctest::Approx(std::numbers::pi));
    CHECK(s.controls.kind() == ControlSet::Kind::finite);
    CHECK(s.controls.points().size() == 2);
    CHECK(s.reference.is_deterministic());
    CHECK_FALSE(s.has_spike());
    CHECK(s.coeffs.drift_preset == "bilinear");
    CHECK(s.check.samples > 0);
    CHECK(s.check.max_relative_deviation <= 1e-5);
}

TEST_CASE("config values reach the scenario")
{
    const Scenario s = build(R"(
# comment
[grid]
n = 8
b = 2
[coefficients]
drift = additive
beta = -0.25
x_target = 0.5
[time]
T = 2
n_t = 32
[run]
seed = 42
paths = 10
x0 = constant
x0_amp = 0.75
eta = 2h2
)");
    CHECK(s.n() == 8);
    CHECK(s.grid.spacing() == doctest::Approx(2.0 / 9.0));
    CHECK(s.seed == 42);
    CHECK(s.config.paths == 10);
    CHECK(s.dt() == doctest::Approx(1.0 / 16));
    for (double v : s.x0.values()) {
        CHECK(v == 0.75);
    }
    const double h = 2.0 / 9.0;
    CHECK(s.eta() == doctest::Approx(2.0 * h * h));
    CHECK(s.parse_eta("h2") == doctest::Approx(h * h));
    CHECK(s.parse_eta("0.01") == 0.01);
    // additive: b = beta x + kappa u, h = (x - x_target)^2 / 2
    const ControlPoint u(1.0);
    CHECK(s.coeffs.b(2.0, u) == doctest::Approx(-0.5 + 1.0));
    CHECK(s.coeffs.h(1.5) == doctest::Approx(0.5));
    CHECK(s.coeffs.h_x(1.5) == doctest::Approx(1.0));
}

TEST_CASE("explicit keys are recorded in order")
{
    const ScenarioConfig c = parse("[run]\nseed = 3\npaths = 7\n");
    REQUIRE(c.explicit_keys.size() == 2);
    CHECK(c.explicit_keys[0].first == "run.seed");
    CHECK(c.explicit_keys[0].second == "3");
    CHECK(c.explicit_keys[1].first == "run.paths");
}

TEST_CASE("parse errors carry line numbers")
{
    CHECK(parse_error_line([] { parse("[grid]\nn = 8\n[nosuch]\nx = 1\n"); }) == 3);
    CHECK(parse_error_line([] { parse("[grid]\nn = 8\nwidth = 3\n"); }) == 3);
    CHECK(parse_error_line([] { parse("[time]\n\nn_t = many\n"); }) == 3);
    CHECK(parse_error_line([] { parse("[grid]\nn = 8\n[grid]\nn = 9\n"); }) > 0);
    CHECK_THROWS_AS(parse("[grid\nn = 8\n"), ParseError);
}

TEST_CASE("set_config_value rejects unknown sections and keys")
{
    ScenarioConfig c;
    CHECK(invariant_of([&] { set_config_value(c, "nosuch", "x", "1"); }) == "config.section");
    CHECK(invariant_of([&] { set_config_value(c, "run", "nosuch", "1"); }) == "config.key");
    CHECK(invariant_of([&] { set_config_value(c, "run", "paths", "-3"); }) == "run.paths");
    set_config_value(c, "coefficients", "beta", "0.1");
    CHECK(c.params.at("beta") == 0.1);
    set_config_value(c, "grid", "b", "pi");
    CHECK(c.b == doctest::Approx(std::numbers::pi));
}

TEST_CASE("build_scenario validations")
{
    CHECK(invariant_of([] { build("[controls]\nreference_values = 0.5\n"); }) == "controls.admissible");
    CHECK(invariant_of([] { build("[controls]\nspike_v = 2\n"); }) == "controls.admissible");
    CHECK(invariant_of([] { build("[controls]\nreference_values = 1, -1\n"); }) == "controls.reference_values");
    CHECK(invariant_of([] { build("[controls]\nreference = nosuch\n"); }) == "controls.reference");
    CHECK(invariant_of([] { build("[controls]\nkind = nosuch\n"); }) == "controls.kind");
    CHECK(invariant_of([] { build("[controls]\nspike_v = -1\nspike_tau = 0.99\nspike_eps = 0.1\n"); }) ==
          "spike.interval");
    CHECK(invariant_of([] { build("[run]\npaths = 1\n"); }) == "run.paths");
    CHECK(invariant_of([] { build("[run]\neps_ladder = 0.1, 0.2\n"); }) == "run.eps_ladder");
    CHECK(invariant_of([] { build("[run]\nx0 = nosuch\n"); }) == "run.x0");
    CHECK(invariant_of([] { build("[run]\nx0_mode = 99\n"); }) == "run.x0_mode");
    CHECK(invariant_of([] { build("[time]\nn_t = 1\n"); }) == "time.n_t");
    CHECK(invariant_of([] { build("[time]\nT = 0\n"); }) == "time.T");
    CHECK(invariant_of([] { build("[noise]\nK = 0\n"); }) == "noise.K");
    CHECK(invariant_of([] { build("[noise]\nK = 17\nshapes = sine\n"); }) == "noise.K");
    CHECK(invariant_of([] { build("[noise]\nshapes = nosuch\n"); }) == "noise.shapes");
    CHECK(invariant_of([] { build("[operator]\nkind = nosuch\n"); }) == "operator.kind");
    CHECK(invariant_of([] { build("[coefficients]\ndrift = nosuch\n"); }) == "coefficients.drift");
    CHECK(invariant_of([] { build("[coefficients]\ncost = nosuch\n"); }) == "coefficients.cost");
    CHECK(invariant_of([] { build("[coefficients]\nc1 = 2\n"); }) == "coefficients.parameter");
    CHECK(invariant_of([] { build("[controls]\nreference = blocks\nreference_values = 1, 1, 1\n"); }) ==
          "control.blocks");
}

TEST_CASE("derivative consistency check catches a wrong derivative")
{
    const std::string msg = [] {
        try {
            build("[coefficients]\nbx_fault = 0.01\n");
        } catch (const ValidationError& e) {
            CHECK(e.invariant() == "coefficients.derivative_consistency");
            return std::string(e.what());
        }
        return std::string();
    }();
    CHECK(msg.find("b/b_x") != std::string::npos);
}

TEST_CASE("every preset pair passes the derivative check")
{
    for (const auto& d : drift_preset_names()) {
        for (const auto& c : cost_preset_names()) {
            const auto coeffs = make_coefficients(d, c, {}, 3);
            const auto check = check_coefficients(coeffs, {ControlPoint(-1.0), ControlPoint(0.5)});
            CHECK(check.max_relative_deviation <= 1e-5);
            CHECK(std::isfinite(check.growth_constant));
        }
    }
}

TEST_CASE("preset formulas")
{
    const auto c = make_coefficients("logistic-drift", "quadratic-cost", {{"c1", 2.0}, {"r", 0.5}}, 2);
    const ControlPoint u(0.5);
    CHECK(c.b(0.25, u) == doctest::Approx(2.0 * 0.25 * 0.75 + 0.5));
    CHECK(c.b_x(0.25, u) == doctest::Approx(2.0 * 0.5));
    CHECK(c.b_xx(0.25, u) == doctest::Approx(-4.0));
    // mode m carries weight 1/(m+1)
    CHECK(c.sigma(1.0, u, 0) == doctest::Approx(0.3 + 0.15));
    CHECK(c.sigma(1.0, u, 1) == doctest::Approx((0.3 + 0.15) / 2));
    CHECK(c.l(1.0, u) == doctest::Approx(0.5 + 0.5 * 0.25));

    const auto k = make_coefficients("bilinear", "constant", {{"s", 0.0}}, 1);
    CHECK(k.sigma_x_vanishes);
    CHECK(k.sigma_u_independent);
    CHECK(k.l(3.0, u) == 1.0);
    CHECK(k.h(3.0) == 0.0);
}

TEST_CASE("control point lists")
{
    const auto one = parse_control_points("-1, 0.5, 1", 1);
    REQUIRE(one.size() == 3);
    CHECK(one[1][0] == 0.5);
    const auto two = parse_control_points("0 1; 1, 0", 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].dim == 2);
    CHECK(two[0][1] == 1.0);
    CHECK(two[1][0] == 1.0);
    CHECK(invariant_of([] { parse_control_points("1 2 3", 2); }) == "controls.dim");
    CHECK(invariant_of([] { parse_control_points("", 1); }) == "controls.nonempty");
    CHECK(invariant_of([] { parse_control_points("1", 9); }) == "controls.dim");
    CHECK(parse_real_list(" 0.5 ,0.25,").size() == 2);
}

TEST_CASE("control sets")
{
    const auto box = ControlSet::box(ControlPoint(-1.0), ControlPoint(1.0), 5);
    const auto lat = box.lattice();
    REQUIRE(lat.size() == 5);
    CHECK(lat.front()[0] == -1.0);
    CHECK(lat.back()[0] == 1.0);
    CHECK(box.contains(ControlPoint(0.3)));
    CHECK_FALSE(box.contains(ControlPoint(1.1)));

    const auto fin = ControlSet::finite({ControlPoint(-1.0), ControlPoint(1.0)});
    CHECK(fin.contains(ControlPoint(1.0)));
    CHECK_FALSE(fin.contains(ControlPoint(0.0)));
    CHECK(invariant_of([] { ControlSet::box(ControlPoint(1.0), ControlPoint(-1.0)); }) == "controls.nonempty");
    CHECK(invariant_of([] { ControlSet::box(ControlPoint(0.0), ControlPoint(1.0), 1); }) == "controls.lattice");
    CHECK(invariant_of([] { ControlSet::finite({}); }) == "controls.nonempty");
}

TEST_CASE("control processes")
{
    const Grid1D g(0.0, 1.0, 4);
    const TimeGrid time{1.0, 8};
    const auto blocks = ControlProcess::blocks({ControlPoint(-1.0), ControlPoint(1.0)}, 8);
    CHECK(blocks.n_steps() == 8);
    CHECK(blocks.evaluate(3, {}, g)[0] == -1.0);
    CHECK(blocks.evaluate(4, {}, g)[0] == 1.0);
    CHECK_THROWS_AS(blocks.evaluate(8, {}, g), StructuralError);

    // steps with t_k in [0.25, 0.5): k = 2, 3
    const auto sp = ControlProcess::spike(blocks, ControlPoint(0.0), 0.25, 0.25, time);
    CHECK(sp.is_spike());
    CHECK(sp.is_deterministic());
    for (std::size_t k = 0; k < 8; ++k) {
        const bool active = k == 2 || k == 3;
        CHECK(sp.spike_active(k) == active);
        CHECK(sp.evaluate(k, {}, g)[0] == (active ? 0.0 : blocks.evaluate(k, {}, g)[0]));
    }
    CHECK_FALSE(blocks.spike_active(2));
    const auto empty = ControlProcess::spike(blocks, ControlPoint(0.0), 0.5, 0.0, time);
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK_FALSE(empty.spike_active(k));
    }
    CHECK(invariant_of([&] { ControlProcess::spike(blocks, ControlPoint(0.0), 0.0, 0.1, time); }) ==
          "spike.interval");

    // feedback on the spatial mean: bins (-inf, 0.5) and [0.5, inf)
    const auto fb = ControlProcess::feedback(
        {0.5}, std::vector<std::vector<ControlPoint>>(8, {ControlPoint(-1.0), ControlPoint(1.0)}));
    CHECK_FALSE(fb.is_deterministic());
    const std::vector<double> low(4, 0.0);
    const std::vector<double> high(4, 1.0);
    CHECK(fb.evaluate(0, low, g)[0] == -1.0);
    CHECK(fb.evaluate(0, high, g)[0] == 1.0);
    // h sum x / |Lambda| with h = 1/5 and four nodes
    CHECK(spatial_mean(high, g) == doctest::Approx(0.8));
    CHECK(invariant_of([] { ControlProcess::feedback({1.0, 0.0}, {{ControlPoint(1.0)}}); }) == "control.feedback");
}
