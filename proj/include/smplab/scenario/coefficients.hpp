#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "smplab/numerics/grid.hpp"
#include "smplab/scenario/control.hpp"

namespace smplab {

using DriftMap = std::function<double(double x, const ControlPoint& u)>;
using NoiseMap = std::function<double(double x, const ControlPoint& u, std::size_t mode)>;
using TerminalMap = std::function<double(double x)>;

/// Pointwise coefficient maps with their first two x-derivatives. Noise is
/// realized per retained mode m as sigma(x, u, m) times a spatial profile
/// owned by the NoiseModel.
struct CoefficientSet {
    std::string drift_preset;
    std::string cost_preset;
    std::size_t K = 1;
    DriftMap b, b_x, b_xx;
    NoiseMap sigma, sigma_x, sigma_xx;
    DriftMap l, l_x, l_xx;
    TerminalMap h, h_x, h_xx;
    /// Structural facts used to skip work and to bypass regression.
    bool sigma_x_vanishes = false;
    bool sigma_u_independent = false;
};

using ParameterMap = std::map<std::string, double>;

/// Names and defaults of the parameters each preset accepts.
const ParameterMap& drift_preset_defaults(const std::string& preset);
const ParameterMap& cost_preset_defaults(const std::string& preset);
std::vector<std::string> drift_preset_names();
std::vector<std::string> cost_preset_names();

/// Builds the coefficient set. Unknown presets and unknown parameter names
/// raise ValidationError. Parameters not given keep their defaults.
CoefficientSet make_coefficients(const std::string& drift, const std::string& cost, const ParameterMap& params,
                                 std::size_t K);

struct CoefficientCheck {
    double max_relative_deviation = 0.0; // worst finite-difference mismatch
    std::string worst_pair;
    double growth_constant = 0.0;        // max |b|/(1+|x|+|u|) and |sigma| likewise
    double derivative_bound = 0.0;       // max of |b_x|,|b_xx|,|sigma_x|,|sigma_xx|,|l_xx|,|h_xx|
    std::size_t samples = 0;
};

/// Central differences (delta = 1e-4) on x in [-x_box, x_box] times the
/// control lattice; every derivative pair must satisfy
/// |fd - d| <= 1e-5 * max(1, |d|). Throws ValidationError citing the
/// maximum relative deviation on failure.
CoefficientCheck check_coefficients(const CoefficientSet& c, const std::vector<ControlPoint>& controls,
                                    double x_box = 4.0);

enum class CoefTag { b, b_x, b_xx, sigma, sigma_x, sigma_xx, l, l_x, l_xx, h, h_x, h_xx };

/// Orthonormal spatial profiles g_m of the retained noise modes; an empty
/// list means every mode is spatially flat (g_m = 1).
struct NoiseModel {
    std::size_t K = 1;
    std::string shape_kind = "flat";
    std::vector<Field> shapes;

    double profile(std::size_t m, std::size_t i) const noexcept { return shapes.empty() ? 1.0 : shapes[m][i]; }
};

/// Nodewise evaluation. Scalar tags return one Field; sigma tags return K.
Field eval_coefficient(const CoefficientSet& c, CoefTag which, const Field& x, const ControlPoint& u);
std::vector<Field> eval_noise_coefficient(const CoefficientSet& c, const NoiseModel& noise, CoefTag which,
                                          const Field& x, const ControlPoint& u);

} // namespace smplab
