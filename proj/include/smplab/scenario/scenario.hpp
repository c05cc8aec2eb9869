#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smplab/numerics/elliptic_operator.hpp"
#include "smplab/numerics/grid.hpp"
#include "smplab/scenario/coefficients.hpp"
#include "smplab/scenario/control.hpp"

namespace smplab {

/// Raw configuration values with their defaults. Every field maps to one
/// key of the config file (section in brackets):
///   [grid] a b n
///   [operator] kind a_c0 a_c1 a0        (a(l) = a_c0 + a_c1 (l-a)/(b-a))
///   [coefficients] drift cost <preset parameters>
///   [controls] kind dim points lo hi lattice reference reference_values
///              feedback_edges spike_v spike_tau spike_eps
///   [noise] K shapes
///   [time] T n_t
///   [run] seed paths x0 x0_amp x0_mode eta eps_ladder reg_linear
///         reg_quadratic x_box out_dir
struct ScenarioConfig {
    double a = 0.0;
    double b = 3.141592653589793;
    std::size_t n = 16;

    std::string op_kind = "laplacian";
    double a_c0 = 1.0;
    double a_c1 = 0.0;
    double a0 = 0.0; // 0 means: use the minimum of a

    std::string drift = "bilinear";
    std::string cost = "quadratic-cost";
    ParameterMap params;

    std::string control_kind = "finite";
    std::size_t control_dim = 1;
    std::vector<ControlPoint> points{ControlPoint(-1.0), ControlPoint(1.0)};
    ControlPoint lo{-1.0};
    ControlPoint hi{1.0};
    std::size_t lattice = 9;
    std::string reference = "constant";
    std::vector<ControlPoint> reference_values{ControlPoint(1.0)};
    std::vector<double> feedback_edges;
    std::optional<ControlPoint> spike_v;
    double spike_tau = 0.5;
    double spike_eps = 0.0625;

    std::size_t K = 1;
    std::string shapes = "flat";

    double T = 1.0;
    std::size_t n_t = 64;

    std::uint64_t seed = 1;
    std::size_t paths = 2000;
    std::string x0 = "sine";
    double x0_amp = 1.0;
    std::size_t x0_mode = 1;
    std::string eta = "4h2";
    std::vector<double> eps_ladder{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    std::size_t reg_linear = 12;
    std::size_t reg_quadratic = 3;
    double x_box = 4.0;
    std::string out_dir = "runs";

    /// Every key explicitly set in the file or by an override, in order.
    std::vector<std::pair<std::string, std::string>> explicit_keys;
};

/// A validated control problem, immutable after construction.
struct Scenario {
    ScenarioConfig config;
    std::string source; // file path or "<inline>"
    Grid1D grid;
    EllipticOperator op;
    CoefficientSet coeffs;
    CoefficientCheck check;
    ControlSet controls;
    NoiseModel noise;
    TimeGrid time;
    Field x0;
    ControlProcess reference;
    std::uint64_t seed = 1;

    double dt() const noexcept { return time.dt(); }
    std::size_t n() const noexcept { return grid.size(); }
    std::size_t K() const noexcept { return noise.K; }
    /// Mollifier width from config.eta ("4h2" style or absolute).
    double eta() const { return parse_eta(config.eta); }
    double parse_eta(const std::string& text) const;
    /// The configured spike of the reference control; throws when absent.
    ControlProcess spiked(double eps) const;
    ControlProcess spiked(double tau, double eps, const ControlPoint& v) const;
    bool has_spike() const noexcept { return config.spike_v.has_value(); }
};

/// Parses the text format into a config; syntax errors carry line numbers,
/// unknown sections or keys are errors.
ScenarioConfig parse_config(std::istream& is);
/// Sets one key ("section.key") from its text value, as the file would.
void set_config_value(ScenarioConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value);

/// Validates and assembles. Runs the coefficient checks.
Scenario build_scenario(const ScenarioConfig& cfg, std::string source = "<inline>");

/// parse_config + SMPLAB_SEED / SMPLAB_OUT_DIR overrides + build_scenario.
Scenario load_scenario(const std::string& path);

/// Text form of the control list syntax used in config files.
std::vector<ControlPoint> parse_control_points(const std::string& text, std::size_t dim);
std::vector<double> parse_real_list(const std::string& text);

} // namespace smplab
