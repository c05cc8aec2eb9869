#include "smplab/forward/state.hpp"

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "smplab/error.hpp"
#include "smplab/numerics/implicit.hpp"

namespace smplab {

AppliedControls::AppliedControls(std::size_t n_t, std::size_t paths, bool per_path)
    : n_t_(n_t), paths_(paths), per_path_(per_path), values_(per_path ? n_t * paths : n_t)
{
}

Field StateHistory::field(const Grid1D& grid, std::size_t k, std::size_t path) const
{
    const RowMatrix& b = x.at(k);
    const auto row = static_cast<Eigen::Index>(path);
    return Field(grid, std::vector<double>(b.row(row).data(), b.row(row).data() + b.cols()));
}

void eval_block(const DriftMap& f, const RowMatrix& x, const ControlAt& u, RowMatrix& out)
{
    const Eigen::Index rows = x.rows();
    const Eigen::Index cols = x.cols();
    out.resize(rows, cols);
#pragma omp parallel for schedule(static)
    for (Eigen::Index p = 0; p < rows; ++p) {
        const ControlPoint& up = u(static_cast<std::size_t>(p));
        for (Eigen::Index i = 0; i < cols; ++i) {
            out(p, i) = f(x(p, i), up);
        }
    }
}

void eval_noise_block(const NoiseMap& f, const NoiseModel& noise, std::size_t m, const RowMatrix& x,
                      const ControlAt& u, RowMatrix& out)
{
    const Eigen::Index rows = x.rows();
    const Eigen::Index cols = x.cols();
    out.resize(rows, cols);
#pragma omp parallel for schedule(static)
    for (Eigen::Index p = 0; p < rows; ++p) {
        const ControlPoint& up = u(static_cast<std::size_t>(p));
        for (Eigen::Index i = 0; i < cols; ++i) {
            out(p, i) = f(x(p, i), up, m) * noise.profile(m, static_cast<std::size_t>(i));
        }
    }
}

void check_finite(const RowMatrix& block, std::size_t step, const char* what)
{
    if (!block.allFinite()) {
        throw BlowUpError(step, std::string(what) + " became non-finite at step " + std::to_string(step));
    }
}

namespace {

using StrideMap = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

StrideMap mode_column(const PathEnsemble& e, std::size_t k, std::size_t m)
{
    return StrideMap(e.step(k) + m, static_cast<Eigen::Index>(e.paths()),
                     Eigen::InnerStride<>(static_cast<Eigen::Index>(e.K())));
}

// One explicit Euler-Maruyama increment followed by the implicit solve.
void advance_state(const Scenario& s, const Resolvent1D& R, const PathEnsemble& e, std::size_t k,
                   const RowMatrix& xk, const ControlAt& u, RowMatrix& next)
{
    const double dt = s.dt();
    RowMatrix work;
    eval_block(s.coeffs.b, xk, u, work);
    next = xk + dt * work;
    for (std::size_t m = 0; m < s.K(); ++m) {
        eval_noise_block(s.coeffs.sigma, s.noise, m, xk, u, work);
        next.array() += work.array().colwise() * mode_column(e, k, m).array();
    }
    R.solve_rows(next.data(), static_cast<std::size_t>(next.rows()));
    check_finite(next, k + 1, "state");
}

void check_shapes(const Scenario& s, const PathEnsemble& e)
{
    if (e.n_t() != s.time.n_t || e.K() != s.K() || e.dt() != s.dt()) {
        throw StructuralError("ensemble shape does not match the scenario time grid and noise modes");
    }
}

} // namespace

StateHistory simulate_state(const Scenario& s, const ControlProcess& u, const PathEnsemble& e)
{
    check_shapes(s, e);
    if (u.n_steps() != s.time.n_t) {
        throw StructuralError("control has " + std::to_string(u.n_steps()) + " steps, scenario has " +
                              std::to_string(s.time.n_t));
    }
    const std::size_t M = e.paths();
    const std::size_t n = s.n();
    const Resolvent1D R(s.op, s.dt());
    StateHistory hist;
    hist.x.resize(s.time.n_t + 1);
    hist.u = AppliedControls(s.time.n_t, M, !u.is_deterministic());
    Eigen::Map<const Eigen::RowVectorXd> x0(s.x0.values().data(), static_cast<Eigen::Index>(n));
    hist.x[0] = x0.replicate(static_cast<Eigen::Index>(M), 1);
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        const RowMatrix& xk = hist.x[k];
        if (hist.u.per_path()) {
            for (std::size_t p = 0; p < M; ++p) {
                const auto row = xk.row(static_cast<Eigen::Index>(p));
                hist.u.at(k, p) = u.evaluate(k, std::span<const double>(row.data(), n), s.grid);
            }
        } else {
            hist.u.at(k, 0) = u.evaluate(k, {}, s.grid);
        }
        const ControlAt ua = [&](std::size_t p) -> const ControlPoint& { return hist.u.at(k, p); };
        advance_state(s, R, e, k, xk, ua, hist.x[k + 1]);
    }
    return hist;
}

const ControlPoint& perturbed_control(const ControlProcess& spike, const StateHistory& xbar, std::size_t k,
                                      std::size_t path) noexcept
{
    if (spike.spike_active(k)) {
        return std::get<SpikeControl>(spike.representation()).v;
    }
    return xbar.u.at(k, path);
}

StateHistory simulate_perturbed(const Scenario& s, const StateHistory& xbar, const ControlProcess& spike,
                                const PathEnsemble& e)
{
    check_shapes(s, e);
    if (!spike.is_spike()) {
        throw StructuralError("simulate_perturbed needs a spike control");
    }
    if (xbar.paths() != e.paths() || xbar.n_t() != e.n_t()) {
        throw StructuralError("perturbed state must use the ensemble of the reference state");
    }
    const std::size_t M = e.paths();
    const Resolvent1D R(s.op, s.dt());
    StateHistory hist;
    hist.x.resize(s.time.n_t + 1);
    hist.u = AppliedControls(s.time.n_t, M, xbar.u.per_path());
    hist.x[0] = xbar.x[0];
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        for (std::size_t p = 0; p < (hist.u.per_path() ? M : 1); ++p) {
            hist.u.at(k, p) = perturbed_control(spike, xbar, k, p);
        }
        const ControlAt ua = [&](std::size_t p) -> const ControlPoint& { return hist.u.at(k, p); };
        advance_state(s, R, e, k, hist.x[k], ua, hist.x[k + 1]);
    }
    return hist;
}

namespace {

constexpr char kMagic[8] = {'S', 'M', 'P', 'L', 'T', 'R', 'J', '1'};

void put(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get(std::istream& is)
{
    std::uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw ParseError(0, "truncated trajectory header");
    }
    return v;
}

} // namespace

void write_trajectory(std::ostream& os, const std::vector<std::vector<double>>& steps, std::size_t n,
                      std::size_t K, bool tensor, const std::vector<ControlPoint>& controls)
{
    const std::size_t width = tensor ? n * n : n;
    const std::size_t dim = controls.empty() ? 0 : controls.front().dim;
    os.write(kMagic, sizeof kMagic);
    put(os, n);
    put(os, steps.empty() ? 0 : steps.size() - 1);
    put(os, K);
    put(os, tensor ? 2 : 1);
    put(os, dim);
    for (const auto& st : steps) {
        if (st.size() != width) {
            throw StructuralError("trajectory step has the wrong width");
        }
        os.write(reinterpret_cast<const char*>(st.data()), static_cast<std::streamsize>(width * sizeof(double)));
    }
    for (const auto& c : controls) {
        os.write(reinterpret_cast<const char*>(c.v.data()), static_cast<std::streamsize>(dim * sizeof(double)));
    }
}

TrajectoryDump read_trajectory(std::istream& is)
{
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw ParseError(0, "not a trajectory dump");
    }
    TrajectoryDump d;
    d.n = get(is);
    d.n_t = get(is);
    d.K = get(is);
    d.tensor = get(is) == 2;
    const std::size_t dim = get(is);
    const std::size_t width = d.tensor ? d.n * d.n : d.n;
    d.steps.assign(d.n_t + 1, std::vector<double>(width));
    for (auto& st : d.steps) {
        if (!is.read(reinterpret_cast<char*>(st.data()), static_cast<std::streamsize>(width * sizeof(double)))) {
            throw ParseError(0, "truncated trajectory payload");
        }
    }
    if (dim > 0) {
        d.controls.resize(d.n_t);
        for (auto& c : d.controls) {
            c.dim = dim;
            if (!is.read(reinterpret_cast<char*>(c.v.data()), static_cast<std::streamsize>(dim * sizeof(double)))) {
                throw ParseError(0, "truncated trajectory controls");
            }
        }
    }
    return d;
}

} // namespace smplab
