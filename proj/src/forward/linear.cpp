#include "smplab/forward/linear.hpp"

#include "smplab/error.hpp"
#include "smplab/numerics/implicit.hpp"

namespace smplab {

namespace {

using StrideMap = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

StrideMap mode_column(const PathEnsemble& e, std::size_t k, std::size_t m)
{
    return StrideMap(e.step(k) + m, static_cast<Eigen::Index>(e.paths()),
                     Eigen::InnerStride<>(static_cast<Eigen::Index>(e.K())));
}

// next = y + dt (a.y + phi) + sum_m (s_m.y + psi_m) dW^m, before the solve.
void explicit_part(const LinearStep& st, const RowMatrix& y, const PathEnsemble& e, std::size_t k, double dt,
                   RowMatrix& next)
{
    next = y;
    if (st.a.size() != 0) {
        next.array() += dt * st.a.array() * y.array();
    }
    if (st.phi.size() != 0) {
        next += dt * st.phi;
    }
    for (std::size_t m = 0; m < e.K(); ++m) {
        const bool has_s = m < st.s.size() && st.s[m].size() != 0;
        const bool has_psi = m < st.psi.size() && st.psi[m].size() != 0;
        if (!has_s && !has_psi) {
            continue;
        }
        const auto dw = mode_column(e, k, m);
        if (has_s) {
            next.array() += (st.s[m].array() * y.array()).colwise() * dw.array();
        }
        if (has_psi) {
            next.array() += st.psi[m].array().colwise() * dw.array();
        }
    }
}

void check_ensemble(const Scenario& s, const PathEnsemble& e)
{
    if (e.n_t() != s.time.n_t || e.K() != s.K()) {
        throw StructuralError("ensemble shape does not match the scenario");
    }
}

} // namespace

void simulate_linear(const Scenario& s, const PathEnsemble& e, const LinearSystem& system,
                     const LinearObserver& observe)
{
    check_ensemble(s, e);
    const Resolvent1D R(s.op, s.dt());
    RowMatrix y = RowMatrix::Zero(static_cast<Eigen::Index>(e.paths()), static_cast<Eigen::Index>(s.n()));
    RowMatrix next;
    LinearStep st;
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        observe(k, y);
        system(k, y, st);
        explicit_part(st, y, e, k, s.dt(), next);
        R.solve_rows(next.data(), static_cast<std::size_t>(next.rows()));
        check_finite(next, k + 1, "linear solution");
        y.swap(next);
    }
    observe(s.time.n_t, y);
}

void simulate_linear_tensor(const Scenario& s, const PathEnsemble& e, const LinearSystem& system,
                            const LinearObserver& observe)
{
    check_ensemble(s, e);
    const SpectralBasis basis(s.op);
    const Resolvent2D R(basis, s.dt());
    const auto n = static_cast<Eigen::Index>(s.n());
    RowMatrix y = RowMatrix::Zero(static_cast<Eigen::Index>(e.paths()), n * n);
    RowMatrix next;
    LinearStep st;
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        observe(k, y);
        system(k, y, st);
        explicit_part(st, y, e, k, s.dt(), next);
        R.solve_rows(next.data(), static_cast<std::size_t>(next.rows()));
        check_finite(next, k + 1, "tensor solution");
        y.swap(next);
    }
    observe(s.time.n_t, y);
}

std::vector<RowMatrix> simulate_linear_history(const Scenario& s, const PathEnsemble& e, const LinearSystem& system)
{
    std::vector<RowMatrix> out;
    out.reserve(s.time.n_t + 1);
    simulate_linear(s, e, system, [&](std::size_t, const RowMatrix& y) { out.push_back(y); });
    return out;
}

Linearization::Linearization(const Scenario& s, const StateHistory& xbar) : s_(&s), xbar_(&xbar)
{
    if (xbar.n_t() != s.time.n_t || xbar.n() != s.n()) {
        throw StructuralError("reference trajectory does not match the scenario grid");
    }
}

ControlAt Linearization::reference(std::size_t k) const
{
    const StateHistory* xb = xbar_;
    return [xb, k](std::size_t p) -> const ControlPoint& { return xb->u.at(k, p); };
}

ControlAt Linearization::perturbed(std::size_t k, const ControlProcess& spike) const
{
    const StateHistory* xb = xbar_;
    const ControlProcess* sp = &spike;
    return [xb, sp, k](std::size_t p) -> const ControlPoint& { return perturbed_control(*sp, *xb, k, p); };
}

void Linearization::drift(const DriftMap& f, std::size_t k, const ControlAt& u, RowMatrix& out) const
{
    eval_block(f, xbar_->x[k], u, out);
}

void Linearization::noise(const NoiseMap& f, std::size_t m, std::size_t k, const ControlAt& u, RowMatrix& out) const
{
    eval_noise_block(f, s_->noise, m, xbar_->x[k], u, out);
}

void Linearization::first_order(std::size_t k, RowMatrix& a, std::vector<RowMatrix>& s) const
{
    const ControlAt u = reference(k);
    drift(s_->coeffs.b_x, k, u, a);
    s.resize(s_->K());
    for (std::size_t m = 0; m < s_->K(); ++m) {
        if (s_->coeffs.sigma_x_vanishes) {
            s[m].resize(0, 0);
        } else {
            noise(s_->coeffs.sigma_x, m, k, u, s[m]);
        }
    }
}

void Linearization::second_order(std::size_t k, RowMatrix& a2, std::vector<RowMatrix>& s2) const
{
    RowMatrix a;
    std::vector<RowMatrix> s;
    first_order(k, a, s);
    const Eigen::Index M = a.rows();
    const Eigen::Index n = a.cols();
    a2.resize(M, n * n);
    s2.assign(s.size(), RowMatrix());
    for (std::size_t m = 0; m < s.size(); ++m) {
        if (s[m].size() != 0) {
            s2[m].resize(M, n * n);
        }
    }
    for (Eigen::Index p = 0; p < M; ++p) {
        const double* ap = a.row(p).data();
        double* out = a2.row(p).data();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                out[i * n + j] = ap[i] + ap[j];
            }
        }
        for (std::size_t m = 0; m < s.size(); ++m) {
            if (s[m].size() == 0) {
                continue;
            }
            const double* sp = s[m].row(p).data();
            double* o2 = s2[m].row(p).data();
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = 0; j < n; ++j) {
                    out[i * n + j] += sp[i] * sp[j];
                    o2[i * n + j] = sp[i] + sp[j];
                }
            }
        }
    }
}

LinearSystem first_variation_system(const Linearization& lin, const ControlProcess& spike)
{
    return [&lin, &spike](std::size_t k, const RowMatrix&, LinearStep& st) {
        lin.first_order(k, st.a, st.s);
        st.phi.resize(0, 0);
        st.psi.assign(lin.scenario().K(), RowMatrix());
        if (!spike.spike_active(k)) {
            return;
        }
        const auto& c = lin.scenario().coeffs;
        const ControlAt ub = lin.reference(k);
        const ControlAt ue = lin.perturbed(k, spike);
        RowMatrix tmp;
        lin.drift(c.b, k, ue, st.phi);
        lin.drift(c.b, k, ub, tmp);
        st.phi -= tmp;
        for (std::size_t m = 0; m < lin.scenario().K(); ++m) {
            lin.noise(c.sigma, m, k, ue, st.psi[m]);
            lin.noise(c.sigma, m, k, ub, tmp);
            st.psi[m] -= tmp;
        }
    };
}

void simulate_variations(const Linearization& lin, const ControlProcess& spike, const PathEnsemble& e,
                         const ExpansionObserver& observe)
{
    const Scenario& s = lin.scenario();
    check_ensemble(s, e);
    const Resolvent1D R(s.op, s.dt());
    const auto& c = s.coeffs;
    const auto M = static_cast<Eigen::Index>(e.paths());
    const auto n = static_cast<Eigen::Index>(s.n());
    RowMatrix y = RowMatrix::Zero(M, n);
    RowMatrix z = RowMatrix::Zero(M, n);
    RowMatrix next;
    RowMatrix tmp;
    RowMatrix tmp2;
    LinearStep sy;
    LinearStep sz;
    const LinearSystem ysys = first_variation_system(lin, spike);
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        observe(k, y, z);
        ysys(k, y, sy);
        // z shares the homogeneous coefficients of y.
        sz.a = sy.a;
        sz.s = sy.s;
        const ControlAt ub = lin.reference(k);
        const RowMatrix y2 = y.array().square().matrix();
        lin.drift(c.b_xx, k, ub, tmp);
        sz.phi = 0.5 * (tmp.array() * y2.array()).matrix();
        sz.psi.assign(s.K(), RowMatrix());
        for (std::size_t m = 0; m < s.K(); ++m) {
            lin.noise(c.sigma_xx, m, k, ub, tmp);
            sz.psi[m] = 0.5 * (tmp.array() * y2.array()).matrix();
        }
        if (spike.spike_active(k)) {
            const ControlAt ue = lin.perturbed(k, spike);
            lin.drift(c.b_x, k, ue, tmp);
            lin.drift(c.b_x, k, ub, tmp2);
            sz.phi.array() += (tmp - tmp2).array() * y.array();
            for (std::size_t m = 0; m < s.K(); ++m) {
                lin.noise(c.sigma_x, m, k, ue, tmp);
                lin.noise(c.sigma_x, m, k, ub, tmp2);
                sz.psi[m].array() += (tmp - tmp2).array() * y.array();
            }
        }
        explicit_part(sz, z, e, k, s.dt(), next);
        R.solve_rows(next.data(), static_cast<std::size_t>(M));
        check_finite(next, k + 1, "second variation");
        z.swap(next);
        explicit_part(sy, y, e, k, s.dt(), next);
        R.solve_rows(next.data(), static_cast<std::size_t>(M));
        check_finite(next, k + 1, "first variation");
        y.swap(next);
    }
    observe(s.time.n_t, y, z);
}

void outer_rows(const RowMatrix& a, const RowMatrix& b, RowMatrix& out)
{
    const Eigen::Index M = a.rows();
    const Eigen::Index n = a.cols();
    out.resize(M, n * n);
    for (Eigen::Index p = 0; p < M; ++p) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ai = a(p, i);
            for (Eigen::Index j = 0; j < n; ++j) {
                out(p, i * n + j) = ai * b(p, j);
            }
        }
    }
}

bool tensor_sources(const Linearization& lin, const ControlProcess& spike, std::size_t k, const RowMatrix& y,
                    RowMatrix& Phi, std::vector<RowMatrix>& Psi)
{
    const Scenario& s = lin.scenario();
    Psi.assign(s.K(), RowMatrix());
    if (!spike.spike_active(k)) {
        Phi.resize(0, 0);
        return false;
    }
    const auto& c = s.coeffs;
    const ControlAt ub = lin.reference(k);
    const ControlAt ue = lin.perturbed(k, spike);
    RowMatrix db;
    RowMatrix tmp;
    lin.drift(c.b, k, ue, db);
    lin.drift(c.b, k, ub, tmp);
    db -= tmp;
    RowMatrix a;
    std::vector<RowMatrix> sx;
    lin.first_order(k, a, sx);

    RowMatrix t1;
    RowMatrix t2;
    outer_rows(y, db, t1);
    outer_rows(db, y, t2);
    Phi = t1 + t2;
    for (std::size_t m = 0; m < s.K(); ++m) {
        RowMatrix ds;
        lin.noise(c.sigma, m, k, ue, ds);
        lin.noise(c.sigma, m, k, ub, tmp);
        ds -= tmp;
        if (sx[m].size() != 0) {
            const RowMatrix sy = (sx[m].array() * y.array()).matrix();
            outer_rows(sy, ds, t1);
            outer_rows(ds, sy, t2);
            Phi += t1 + t2;
        }
        outer_rows(ds, ds, t1);
        Phi += t1;
        outer_rows(ds, y, t1);
        outer_rows(y, ds, t2);
        Psi[m] = t1 + t2;
    }
    return true;
}

void simulate_tensor(const Linearization& lin, const ControlProcess& spike, const PathEnsemble& e,
                     const TensorObserver& observe)
{
    const Scenario& s = lin.scenario();
    check_ensemble(s, e);
    const Resolvent1D R(s.op, s.dt());
    const SpectralBasis basis(s.op);
    const Resolvent2D R2(basis, s.dt());
    const auto M = static_cast<Eigen::Index>(e.paths());
    const auto n = static_cast<Eigen::Index>(s.n());
    RowMatrix y = RowMatrix::Zero(M, n);
    RowMatrix Y = RowMatrix::Zero(M, n * n);
    RowMatrix next;
    LinearStep sy;
    LinearStep sY;
    const LinearSystem ysys = first_variation_system(lin, spike);
    for (std::size_t k = 0; k < s.time.n_t; ++k) {
        observe(k, y, Y);
        ysys(k, y, sy);
        lin.second_order(k, sY.a, sY.s);
        tensor_sources(lin, spike, k, y, sY.phi, sY.psi);
        explicit_part(sY, Y, e, k, s.dt(), next);
        R2.solve_rows(next.data(), static_cast<std::size_t>(M));
        check_finite(next, k + 1, "tensor process");
        Y.swap(next);
        explicit_part(sy, y, e, k, s.dt(), next);
        R.solve_rows(next.data(), static_cast<std::size_t>(M));
        check_finite(next, k + 1, "first variation");
        y.swap(next);
    }
    observe(s.time.n_t, y, Y);
}

} // namespace smplab
