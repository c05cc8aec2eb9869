#include "smplab/scenario/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "smplab/error.hpp"
#include "smplab/numerics/spectral_basis.hpp"

namespace smplab {

namespace {

std::string trim(std::string s)
{
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double to_real(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    if (t == "pi") {
        return std::numbers::pi;
    }
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ValidationError(key, "expected a real number, got '" + text + "'");
    }
    return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ValidationError(key, "expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

std::size_t to_size(const std::string& key, const std::string& text)
{
    return static_cast<std::size_t>(to_u64(key, text));
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters()
{
    static const std::map<std::string, std::map<std::string, Setter>> table = {
        {"grid",
         {
             {"a", [](ScenarioConfig& c, const std::string& v) { c.a = to_real("grid.a", v); }},
             {"b", [](ScenarioConfig& c, const std::string& v) { c.b = to_real("grid.b", v); }},
             {"n", [](ScenarioConfig& c, const std::string& v) { c.n = to_size("grid.n", v); }},
         }},
        {"operator",
         {
             {"kind", [](ScenarioConfig& c, const std::string& v) { c.op_kind = trim(v); }},
             {"a_c0", [](ScenarioConfig& c, const std::string& v) { c.a_c0 = to_real("operator.a_c0", v); }},
             {"a_c1", [](ScenarioConfig& c, const std::string& v) { c.a_c1 = to_real("operator.a_c1", v); }},
             {"a0", [](ScenarioConfig& c, const std::string& v) { c.a0 = to_real("operator.a0", v); }},
         }},
        {"coefficients",
         {
             {"drift", [](ScenarioConfig& c, const std::string& v) { c.drift = trim(v); }},
             {"cost", [](ScenarioConfig& c, const std::string& v) { c.cost = trim(v); }},
         }},
        {"controls",
         {
             {"kind", [](ScenarioConfig& c, const std::string& v) { c.control_kind = trim(v); }},
             {"dim", [](ScenarioConfig& c, const std::string& v) { c.control_dim = to_size("controls.dim", v); }},
             {"points",
              [](ScenarioConfig& c, const std::string& v) { c.points = parse_control_points(v, c.control_dim); }},
             {"lo",
              [](ScenarioConfig& c, const std::string& v) { c.lo = parse_control_points(v, c.control_dim).at(0); }},
             {"hi",
              [](ScenarioConfig& c, const std::string& v) { c.hi = parse_control_points(v, c.control_dim).at(0); }},
             {"lattice", [](ScenarioConfig& c, const std::string& v) { c.lattice = to_size("controls.lattice", v); }},
             {"reference", [](ScenarioConfig& c, const std::string& v) { c.reference = trim(v); }},
             {"reference_values",
              [](ScenarioConfig& c, const std::string& v) {
                  c.reference_values = parse_control_points(v, c.control_dim);
              }},
             {"feedback_edges",
              [](ScenarioConfig& c, const std::string& v) { c.feedback_edges = parse_real_list(v); }},
             {"spike_v",
              [](ScenarioConfig& c, const std::string& v) {
                  c.spike_v = parse_control_points(v, c.control_dim).at(0);
              }},
             {"spike_tau", [](ScenarioConfig& c, const std::string& v) { c.spike_tau = to_real("controls.spike_tau", v); }},
             {"spike_eps", [](ScenarioConfig& c, const std::string& v) { c.spike_eps = to_real("controls.spike_eps", v); }},
         }},
        {"noise",
         {
             {"K", [](ScenarioConfig& c, const std::string& v) { c.K = to_size("noise.K", v); }},
             {"shapes", [](ScenarioConfig& c, const std::string& v) { c.shapes = trim(v); }},
         }},
        {"time",
         {
             {"T", [](ScenarioConfig& c, const std::string& v) { c.T = to_real("time.T", v); }},
             {"n_t", [](ScenarioConfig& c, const std::string& v) { c.n_t = to_size("time.n_t", v); }},
         }},
        {"run",
         {
             {"seed", [](ScenarioConfig& c, const std::string& v) { c.seed = to_u64("run.seed", v); }},
             {"paths", [](ScenarioConfig& c, const std::string& v) { c.paths = to_size("run.paths", v); }},
             {"x0", [](ScenarioConfig& c, const std::string& v) { c.x0 = trim(v); }},
             {"x0_amp", [](ScenarioConfig& c, const std::string& v) { c.x0_amp = to_real("run.x0_amp", v); }},
             {"x0_mode", [](ScenarioConfig& c, const std::string& v) { c.x0_mode = to_size("run.x0_mode", v); }},
             {"eta", [](ScenarioConfig& c, const std::string& v) { c.eta = trim(v); }},
             {"eps_ladder", [](ScenarioConfig& c, const std::string& v) { c.eps_ladder = parse_real_list(v); }},
             {"reg_linear", [](ScenarioConfig& c, const std::string& v) { c.reg_linear = to_size("run.reg_linear", v); }},
             {"reg_quadratic",
              [](ScenarioConfig& c, const std::string& v) { c.reg_quadratic = to_size("run.reg_quadratic", v); }},
             {"x_box", [](ScenarioConfig& c, const std::string& v) { c.x_box = to_real("run.x_box", v); }},
             {"out_dir", [](ScenarioConfig& c, const std::string& v) { c.out_dir = trim(v); }},
         }},
    };
    return table;
}

// Line numbers of "section.key" entries, for error messages. The property
// tree parser does not keep them.
std::map<std::string, std::size_t> key_lines(const std::string& text)
{
    std::map<std::string, std::size_t> out;
    std::istringstream is(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') {
            continue;
        }
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            out.emplace(section, lineno);
            continue;
        }
        const auto eq = t.find('=');
        if (eq != std::string::npos) {
            out.emplace(section + "." + trim(t.substr(0, eq)), lineno);
        }
    }
    return out;
}

Field make_x0(const ScenarioConfig& c, const Grid1D& g, const SpectralBasis& basis)
{
    if (c.x0 == "zero") {
        return Field(g, 0.0);
    }
    if (c.x0 == "constant") {
        return Field(g, c.x0_amp);
    }
    if (c.x0 == "sine") {
        if (c.x0_mode < 1 || c.x0_mode > g.size()) {
            throw ValidationError("run.x0_mode", "mode index must lie in [1, n]");
        }
        // Unit sup-norm sine profile scaled by the amplitude.
        Field f = basis.mode(c.x0_mode - 1);
        double peak = 0.0;
        for (double v : f.values()) {
            peak = std::max(peak, std::abs(v));
        }
        for (auto& v : f.values()) {
            v *= c.x0_amp / peak;
        }
        return f;
    }
    throw ValidationError("run.x0", "unknown initial profile '" + c.x0 + "' (zero, constant, sine)");
}

} // namespace

std::vector<double> parse_real_list(const std::string& text)
{
    std::vector<double> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        if (!trim(item).empty()) {
            out.push_back(to_real("list", item));
        }
    }
    return out;
}

std::vector<ControlPoint> parse_control_points(const std::string& text, std::size_t dim)
{
    if (dim < 1 || dim > kMaxControlDim) {
        throw ValidationError("controls.dim", "control dimension must be between 1 and " +
                                                  std::to_string(kMaxControlDim));
    }
    std::vector<ControlPoint> out;
    if (dim == 1 && text.find(';') == std::string::npos) {
        for (double v : parse_real_list(text)) {
            out.emplace_back(v);
        }
    } else {
        std::istringstream is(text);
        std::string part;
        while (std::getline(is, part, ';')) {
            std::replace(part.begin(), part.end(), ',', ' ');
            std::istringstream ps(part);
            std::vector<double> coords;
            std::string tok;
            while (ps >> tok) {
                coords.push_back(to_real("controls.point", tok));
            }
            if (coords.empty()) {
                continue;
            }
            if (coords.size() != dim) {
                throw ValidationError("controls.dim", "control point '" + trim(part) + "' does not have " +
                                                          std::to_string(dim) + " coordinates");
            }
            out.emplace_back(std::span<const double>(coords));
        }
    }
    if (out.empty()) {
        throw ValidationError("controls.nonempty", "empty control point list");
    }
    return out;
}

void set_config_value(ScenarioConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value)
{
    const auto& table = setters();
    const auto sec = table.find(section);
    if (sec == table.end()) {
        throw ValidationError("config.section", "unknown section [" + section + "]");
    }
    const auto it = sec->second.find(key);
    if (it != sec->second.end()) {
        it->second(cfg, value);
    } else if (section == "coefficients") {
        cfg.params[key] = to_real("coefficients." + key, value);
    } else {
        throw ValidationError("config.key", "unknown key '" + key + "' in section [" + section + "]");
    }
    cfg.explicit_keys.emplace_back(section + "." + key, trim(value));
}

ScenarioConfig parse_config(std::istream& is)
{
    std::stringstream buffer;
    buffer << is.rdbuf();
    const std::string text = buffer.str();
    boost::property_tree::ptree tree;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(e.line(), e.message());
    }
    const auto lines = key_lines(text);
    auto line_of = [&](const std::string& k) {
        const auto it = lines.find(k);
        return it == lines.end() ? std::size_t{0} : it->second;
    };

    ScenarioConfig cfg;
    // Sections must be processed so that [controls] dim precedes point lists.
    std::vector<std::pair<std::string, const boost::property_tree::ptree*>> sections;
    for (const auto& [name, sub] : tree) {
        if (sub.empty() && !sub.data().empty()) {
            throw ParseError(line_of("." + name), "key '" + name + "' outside of any section");
        }
        sections.emplace_back(name, &sub);
    }
    for (const auto& [name, sub] : sections) {
        if (setters().count(name) == 0) {
            throw ParseError(line_of(name), "unknown section [" + name + "]");
        }
        std::vector<std::pair<std::string, std::string>> entries;
        for (const auto& [key, node] : *sub) {
            entries.emplace_back(key, node.data());
        }
        std::stable_partition(entries.begin(), entries.end(), [](const auto& e) { return e.first == "dim"; });
        for (const auto& [key, value] : entries) {
            try {
                set_config_value(cfg, name, key, value);
            } catch (const ValidationError& e) {
                throw ParseError(line_of(name + "." + key), e.what());
            }
        }
    }
    return cfg;
}

double Scenario::parse_eta(const std::string& text) const
{
    const std::string t = trim(text);
    const auto pos = t.find("h2");
    const double h = grid.spacing();
    if (pos != std::string::npos && pos + 2 == t.size()) {
        const std::string factor = t.substr(0, pos);
        const double f = factor.empty() ? 1.0 : to_real("eta", factor);
        return f * h * h;
    }
    return to_real("eta", t);
}

ControlProcess Scenario::spiked(double eps) const
{
    if (!config.spike_v) {
        throw ValidationError("controls.spike_v", "scenario has no spike value configured");
    }
    return spiked(config.spike_tau, eps, *config.spike_v);
}

ControlProcess Scenario::spiked(double tau, double eps, const ControlPoint& v) const
{
    return ControlProcess::spike(reference, v, tau, eps, time);
}

Scenario build_scenario(const ScenarioConfig& cfg, std::string source)
{
    Scenario s;
    s.config = cfg;
    s.source = std::move(source);
    s.grid = Grid1D(cfg.a, cfg.b, cfg.n);

    if (cfg.op_kind == "laplacian") {
        s.op = EllipticOperator::laplacian(s.grid);
    } else if (cfg.op_kind == "divergence_form") {
        const double a = cfg.a;
        const double len = cfg.b - cfg.a;
        auto coeff = [&](double x) { return cfg.a_c0 + cfg.a_c1 * (x - a) / len; };
        const double lo = std::min(coeff(cfg.a), coeff(cfg.b));
        const double a0 = cfg.a0 > 0.0 ? cfg.a0 : lo;
        s.op = EllipticOperator::divergence_form(s.grid, coeff, a0);
    } else {
        throw ValidationError("operator.kind", "unknown operator kind '" + cfg.op_kind + "'");
    }

    if (cfg.T <= 0.0) {
        throw ValidationError("time.T", "horizon must be positive");
    }
    if (cfg.n_t < 2) {
        throw ValidationError("time.n_t", "at least 2 time steps required");
    }
    s.time = TimeGrid{cfg.T, cfg.n_t};

    if (cfg.K < 1) {
        throw ValidationError("noise.K", "at least one noise mode is required");
    }
    s.noise.K = cfg.K;
    s.noise.shape_kind = cfg.shapes;
    const SpectralBasis basis(EllipticOperator::laplacian(s.grid));
    if (cfg.shapes == "sine") {
        if (cfg.K > cfg.n) {
            throw ValidationError("noise.K", "sine profiles need K <= n");
        }
        for (std::size_t m = 0; m < cfg.K; ++m) {
            s.noise.shapes.push_back(basis.mode(m));
        }
    } else if (cfg.shapes != "flat") {
        throw ValidationError("noise.shapes", "unknown mode shape family '" + cfg.shapes + "' (flat, sine)");
    }

    if (cfg.control_kind == "finite") {
        s.controls = ControlSet::finite(cfg.points);
    } else if (cfg.control_kind == "box") {
        s.controls = ControlSet::box(cfg.lo, cfg.hi, cfg.lattice);
    } else {
        throw ValidationError("controls.kind", "unknown control set kind '" + cfg.control_kind + "'");
    }
    for (const auto& u : cfg.reference_values) {
        if (!s.controls.contains(u)) {
            throw ValidationError("controls.admissible", "reference value " + u.to_string() + " is not in U");
        }
    }
    if (cfg.reference == "constant") {
        if (cfg.reference_values.size() != 1) {
            throw ValidationError("controls.reference_values", "constant reference takes exactly one value");
        }
        s.reference = ControlProcess::constant(cfg.reference_values[0], cfg.n_t);
    } else if (cfg.reference == "blocks") {
        s.reference = ControlProcess::blocks(cfg.reference_values, cfg.n_t);
    } else if (cfg.reference == "feedback") {
        if (cfg.reference_values.size() != cfg.feedback_edges.size() + 1) {
            throw ValidationError("controls.feedback", "feedback needs one reference value per bin");
        }
        s.reference = ControlProcess::feedback(
            cfg.feedback_edges, std::vector<std::vector<ControlPoint>>(cfg.n_t, cfg.reference_values));
    } else {
        throw ValidationError("controls.reference", "unknown reference control '" + cfg.reference + "'");
    }
    if (cfg.spike_v) {
        if (!s.controls.contains(*cfg.spike_v)) {
            throw ValidationError("controls.admissible", "spike value " + cfg.spike_v->to_string() + " is not in U");
        }
        (void)ControlProcess::spike(s.reference, *cfg.spike_v, cfg.spike_tau, cfg.spike_eps, s.time);
    }

    s.coeffs = make_coefficients(cfg.drift, cfg.cost, cfg.params, cfg.K);
    s.check = check_coefficients(s.coeffs, s.controls.lattice(), cfg.x_box);

    s.x0 = make_x0(cfg, s.grid, basis);
    s.seed = cfg.seed;
    if (cfg.paths < 2) {
        throw ValidationError("run.paths", "at least 2 paths are required for standard errors");
    }
    (void)s.eta();
    for (std::size_t i = 0; i < cfg.eps_ladder.size(); ++i) {
        if (!(cfg.eps_ladder[i] > 0.0) || (i > 0 && !(cfg.eps_ladder[i] < cfg.eps_ladder[i - 1]))) {
            throw ValidationError("run.eps_ladder", "ladder must be positive and strictly decreasing");
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open scenario file '" + path + "'");
    }
    ScenarioConfig cfg = parse_config(in);
    if (const char* seed = std::getenv("SMPLAB_SEED"); seed != nullptr && *seed != '\0') {
        set_config_value(cfg, "run", "seed", seed);
    }
    if (const char* out = std::getenv("SMPLAB_OUT_DIR"); out != nullptr && *out != '\0') {
        set_config_value(cfg, "run", "out_dir", out);
    }
    return build_scenario(cfg, path);
}

} // namespace smplab
