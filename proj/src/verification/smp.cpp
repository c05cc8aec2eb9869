#include "smplab/verification/smp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smplab/error.hpp"
#include "smplab/forward/cost.hpp"
#include "smplab/log.hpp"

namespace smplab {

namespace {

ControlAt constant_at(const ControlPoint& v)
{
    return [&v](std::size_t) -> const ControlPoint& { return v; };
}

double percentile05(Eigen::VectorXd v)
{
    if (v.size() == 0) {
        return 0.0;
    }
    const auto idx = static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(v.size() - 1)));
    std::nth_element(v.data(), v.data() + idx, v.data() + v.size());
    return v[static_cast<Eigen::Index>(idx)];
}

Estimate estimate_of(const Eigen::VectorXd& v) { return estimate(std::span<const double>(v.data(), v.size())); }

} // namespace

Eigen::VectorXd hamiltonian_rows(const Scenario& s, const RowMatrix& x, const ControlAt& u, const RowMatrix& p,
                                 const std::vector<RowMatrix>& q)
{
    const auto& c = s.coeffs;
    const double h = s.grid.spacing();
    RowMatrix blk;
    eval_block(c.l, x, u, blk);
    Eigen::VectorXd H = blk.rowwise().sum();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        H[r] += c.l(0.0, u(static_cast<std::size_t>(r)));
    }
    eval_block(c.b, x, u, blk);
    H += (p.array() * blk.array()).rowwise().sum().matrix();
    for (std::size_t m = 0; m < q.size(); ++m) {
        eval_noise_block(c.sigma, s.noise, m, x, u, blk);
        H += (q[m].array() * blk.array()).rowwise().sum().matrix();
    }
    return h * H;
}

double hamiltonian(const Scenario& s, const Field& x, const ControlPoint& u, const Field& p,
                   const std::vector<Field>& q)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    if (p.size() != x.size() || q.size() != s.K()) {
        throw StructuralError("hamiltonian arguments do not match the grid or the noise modes");
    }
    const auto row = [n](const Field& f) {
        return RowMatrix(Eigen::Map<const RowMatrix>(f.values().data(), 1, n));
    };
    std::vector<RowMatrix> qb;
    for (const Field& f : q) {
        if (f.size() != x.size()) {
            throw StructuralError("hamiltonian arguments do not match the grid");
        }
        qb.push_back(row(f));
    }
    return hamiltonian_rows(s, row(x), constant_at(u), row(p), qb)[0];
}

namespace {

// Gaps at step k for every lattice point, adjoints evaluated once.
std::vector<Eigen::VectorXd> gaps_at(const Scenario& s, std::size_t k, const std::vector<ControlPoint>& lattice,
                                     const BackwardPair1& pq, const BackwardPair2& PQ)
{
    const StateHistory& xbar = pq.designs().xbar();
    const Linearization lin(s, xbar);
    const RowMatrix& x = xbar.x.at(k);
    const double h = s.grid.spacing();
    const auto n = static_cast<Eigen::Index>(s.n());
    RowMatrix pt;
    std::vector<RowMatrix> q;
    RowMatrix Pt;
    std::vector<RowMatrix> Q;
    pq.evaluate(k, pt, q);
    PQ.evaluate(k, Pt, Q);
    const ControlAt ub = lin.reference(k);
    const Eigen::VectorXd Hub = hamiltonian_rows(s, x, ub, pt, q);
    std::vector<RowMatrix> sig_ub(s.K());
    for (std::size_t m = 0; m < s.K(); ++m) {
        eval_noise_block(s.coeffs.sigma, s.noise, m, x, ub, sig_ub[m]);
    }
    std::vector<Eigen::VectorXd> out;
    RowMatrix ds;
    for (const ControlPoint& v : lattice) {
        const ControlAt uv = constant_at(v);
        Eigen::VectorXd G = hamiltonian_rows(s, x, uv, pt, q) - Hub;
        for (std::size_t m = 0; m < s.K(); ++m) {
            eval_noise_block(s.coeffs.sigma, s.noise, m, x, uv, ds);
            ds -= sig_ub[m];
            if (ds.isZero(0.0)) {
                continue;
            }
            for (Eigen::Index p = 0; p < x.rows(); ++p) {
                const Eigen::Map<const RowMatrix> P(Pt.row(p).data(), n, n);
                const auto d = ds.row(p);
                G[p] += 0.5 * h * h * d.dot(d * P);
            }
        }
        out.push_back(std::move(G));
    }
    return out;
}

} // namespace

Eigen::VectorXd smp_gap(const Scenario& s, std::size_t k, const ControlPoint& v, const BackwardPair1& pq,
                        const BackwardPair2& PQ)
{
    if (k >= s.time.n_t) {
        throw DomainError("the gap is defined for steps before the terminal one");
    }
    return gaps_at(s, k, {v}, pq, PQ).front();
}

std::vector<std::size_t> smp_sample_steps(std::size_t n_t, std::size_t count)
{
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < count; ++b) {
        const auto k = static_cast<std::size_t>(std::floor((static_cast<double>(b) + 0.5) *
                                                           static_cast<double>(n_t) / static_cast<double>(count)));
        if (k < n_t && (out.empty() || out.back() != k)) {
            out.push_back(k);
        }
    }
    return out;
}

SMPReport smp_report(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& PQ,
                     const std::vector<ControlPoint>& lattice, const std::vector<std::size_t>& steps, double tol)
{
    SMPReport rep;
    rep.tol = tol;
    for (const std::size_t k : steps) {
        const auto gaps = gaps_at(s, k, lattice, pq, PQ);
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            SMPSample smp;
            smp.step = k;
            smp.v = lattice[i];
            smp.gap = estimate_of(gaps[i]);
            smp.p05 = percentile05(gaps[i]);
            rep.samples.push_back(smp);
        }
    }
    bool first = true;
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        const SMPSample& smp = rep.samples[i];
        rep.scale = std::max(rep.scale, std::abs(smp.gap.mean));
        if (first || smp.gap.mean < rep.min_mean) {
            rep.min_mean = smp.gap.mean;
            rep.argmin = i;
        }
        rep.min_p05 = first ? smp.p05 : std::min(rep.min_p05, smp.p05);
        first = false;
    }
    rep.pass = rep.min_mean >= -tol * rep.scale;
    return rep;
}

Estimate cost_difference(const Scenario& s, const PathEnsemble& e, const ControlProcess& a, const ControlProcess& b)
{
    const auto ja = path_costs(s, simulate_state(s, a, e));
    const auto jb = path_costs(s, simulate_state(s, b, e));
    return paired_difference(jb, ja);
}

BruteForceResult brute_force_search(const Scenario& s, const PathEnsemble& e, std::size_t blocks)
{
    if (s.controls.kind() != ControlSet::Kind::finite) {
        throw ValidationError("controls.kind", "brute force search needs a finite control set");
    }
    const std::vector<ControlPoint> U = s.controls.points();
    if (U.empty() || U.size() > 3) {
        throw ValidationError("controls.points", "brute force search supports 1 to 3 control values");
    }
    if (blocks == 0 || blocks > 8) {
        throw ValidationError("brute_force.blocks", "between 1 and 8 control blocks are supported");
    }
    std::size_t count = 1;
    for (std::size_t b = 0; b < blocks; ++b) {
        count *= U.size();
    }
    BruteForceResult out;
    out.blocks = blocks;
    std::vector<std::vector<double>> costs(count);
    bool have = false;
    for (std::size_t idx = 0; idx < count; ++idx) {
        Candidate cand;
        std::size_t rest = idx;
        cand.blocks.resize(blocks);
        // First block is the most significant digit.
        for (std::size_t b = blocks; b-- > 0;) {
            cand.blocks[b] = U[rest % U.size()];
            rest /= U.size();
        }
        try {
            const ControlProcess u = ControlProcess::blocks(cand.blocks, s.time.n_t);
            costs[idx] = path_costs(s, simulate_state(s, u, e));
            cand.J = estimate(costs[idx]);
            if (!have || cand.J.mean < out.table[out.argmin].J.mean) {
                out.argmin = idx;
                have = true;
            }
        } catch (const BlowUpError& err) {
            cand.excluded = true;
            warn("candidate " + std::to_string(idx) + " excluded: " + err.what());
        }
        out.table.push_back(std::move(cand));
    }
    if (!have) {
        throw BlowUpError(0, "every candidate control blew up");
    }
    for (std::size_t idx = 0; idx < count; ++idx) {
        Candidate& cand = out.table[idx];
        if (cand.excluded || idx == out.argmin) {
            continue;
        }
        const Estimate d = paired_difference(costs[idx], costs[out.argmin]);
        cand.tie = d.mean <= d.se;
    }
    out.best = ControlProcess::blocks(out.table[out.argmin].blocks, s.time.n_t);
    return out;
}

ContrapositiveReport contrapositive_check(const Scenario& s, const PathEnsemble& e,
                                          const std::vector<ControlPoint>& base, std::size_t block,
                                          const ControlPoint& replacement, double threshold)
{
    if (block >= base.size()) {
        throw DomainError("block index outside the control");
    }
    ContrapositiveReport rep;
    rep.block = block;
    rep.control = base;
    rep.control[block] = replacement;
    const ControlProcess bad = ControlProcess::blocks(rep.control, s.time.n_t);
    const StateHistory xbar = simulate_state(s, bad, e);
    const RegressionBasis basis{s.config.reg_linear, s.config.reg_quadratic};
    const BackwardPair1 pq = solve_adjoint1(s, xbar, e, basis);
    const BackwardPair2 PQ = solve_adjoint2(s, pq, e, Terminal2::diagonal());
    rep.smp = smp_report(s, pq, PQ, s.controls.lattice(), smp_sample_steps(s.time.n_t, base.size()));
    const SMPSample& worst = rep.smp.samples.at(rep.smp.argmin);
    rep.step = worst.step;
    rep.v = worst.v;
    rep.gap_found = rep.smp.min_mean < -threshold * rep.smp.scale;

    const std::size_t per_block = s.time.n_t / base.size();
    rep.spike_eps = static_cast<double>(std::max<std::size_t>(per_block / 2, 1)) * s.dt();
    const double tau = s.time.time(rep.step);
    if (tau > 0.0 && tau + rep.spike_eps <= s.time.T) {
        const ControlProcess spiked = ControlProcess::spike(bad, rep.v, tau, rep.spike_eps, s.time);
        rep.dJ = cost_difference(s, e, bad, spiked);
        rep.descent = rep.dJ.mean + 2.0 * rep.dJ.se < 0.0;
    }
    return rep;
}

} // namespace smplab
