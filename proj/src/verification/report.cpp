#include "smplab/verification/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "smplab/numerics/field_io.hpp"

namespace smplab {

namespace {

std::string no_spaces(std::string s)
{
    std::replace(s.begin(), s.end(), ' ', '_');
    return s;
}

const char* flag(bool b) { return b ? "1" : "0"; }

} // namespace

std::string format_verdict(const Verdict& v)
{
    std::string line = "VERDICT id=" + no_spaces(v.id) + " result=" + (v.pass ? "PASS" : "FAIL") +
                       " stat=" + no_spaces(v.stat.empty() ? "undefined" : v.stat) +
                       " tol=" + no_spaces(v.tol.empty() ? "none" : v.tol);
    if (!v.note.empty()) {
        line += " note=" + no_spaces(v.note);
    }
    return line;
}

bool parse_verdict(const std::string& line, Verdict& out)
{
    std::istringstream is(line);
    std::string word;
    if (!(is >> word) || word != "VERDICT") {
        return false;
    }
    Verdict v;
    bool have_id = false;
    bool have_result = false;
    while (is >> word) {
        const auto eq = word.find('=');
        if (eq == std::string::npos) {
            return false;
        }
        const std::string key = word.substr(0, eq);
        const std::string value = word.substr(eq + 1);
        if (key == "id") {
            v.id = value;
            have_id = true;
        } else if (key == "result") {
            if (value != "PASS" && value != "FAIL") {
                return false;
            }
            v.pass = value == "PASS";
            have_result = true;
        } else if (key == "stat") {
            v.stat = value;
        } else if (key == "tol") {
            v.tol = value;
        } else if (key == "note") {
            v.note = value;
        } else {
            return false;
        }
    }
    if (!have_id || !have_result) {
        return false;
    }
    out = v;
    return true;
}

Verdict verdict_of(const DualityReport& r)
{
    Verdict v;
    v.id = r.id + "." + r.probe;
    v.pass = r.pass;
    v.stat = format_double(r.relative_gap);
    v.tol = format_double(r.tol);
    if (!r.crn) {
        v.note = "not on common noise";
    }
    return v;
}

Verdict verdict_of(const RateReport& r)
{
    Verdict v;
    v.id = std::string("rates.") + to_string(r.kind);
    // A statistic that vanishes identically has no slope; that is reported, not failed.
    v.pass = r.pass || r.identically_zero;
    v.tol = format_double(r.threshold);
    if (r.identically_zero) {
        v.note = "slope undefined, statistic identically 0";
    } else if (!r.fit.defined) {
        v.note = "slope undefined";
    } else {
        v.stat = format_double(r.fit.slope);
        v.note = "ci=[" + format_double(r.fit.ci_low) + "," + format_double(r.fit.ci_high) + "]";
    }
    return v;
}

Verdict verdict_of(const SMPReport& r, const std::string& id)
{
    Verdict v;
    v.id = id;
    v.pass = r.pass;
    v.stat = r.scale > 0.0 ? format_double(r.min_mean / r.scale) : "0";
    v.tol = format_double(-r.tol);
    v.note = "min_mean=" + format_double(r.min_mean) + " scale=" + format_double(r.scale) +
             " min_p05=" + format_double(r.min_p05);
    return v;
}

void write_summary(std::ostream& os, const std::vector<Verdict>& verdicts)
{
    std::size_t width = 2;
    for (const auto& v : verdicts) {
        width = std::max(width, v.id.size());
    }
    std::size_t passed = 0;
    os << std::left << std::setw(static_cast<int>(width)) << "id" << "  result  stat\n";
    for (const auto& v : verdicts) {
        os << std::left << std::setw(static_cast<int>(width)) << v.id << "  " << (v.pass ? "PASS  " : "FAIL  ")
           << "  " << (v.stat.empty() ? "undefined" : v.stat) << '\n';
        passed += v.pass ? 1 : 0;
    }
    os << passed << "/" << verdicts.size() << " passed\n";
}

void write_duality_csv(std::ostream& os, const std::vector<DualityReport>& reports)
{
    os << "# schema: smplab/duality v1\n"
       << "id,probe,lhs,lhs_se,rhs,rhs_se,diff,diff_se,relative_gap,paths,crn,tol,pass\n";
    for (const auto& r : reports) {
        os << r.id << ',' << r.probe << ',' << format_double(r.lhs.mean) << ',' << format_double(r.lhs.se) << ','
           << format_double(r.rhs.mean) << ',' << format_double(r.rhs.se) << ',' << format_double(r.diff.mean)
           << ',' << format_double(r.diff.se) << ',' << format_double(r.relative_gap) << ',' << r.paths << ','
           << flag(r.crn) << ',' << format_double(r.tol) << ',' << flag(r.pass) << '\n';
    }
}

void write_rates_csv(std::ostream& os, const std::vector<RateReport>& reports)
{
    os << "# schema: smplab/rates v1\n"
       << "kind,eps,value,se,slope,slope_se,ci_low,ci_high,threshold,pass\n";
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < r.eps.size(); ++i) {
            os << to_string(r.kind) << ',' << format_double(r.eps[i]) << ',' << format_double(r.values[i].mean)
               << ',' << format_double(r.values[i].se) << ',';
            if (r.fit.defined) {
                os << format_double(r.fit.slope) << ',' << format_double(r.fit.se) << ','
                   << format_double(r.fit.ci_low) << ',' << format_double(r.fit.ci_high);
            } else {
                os << "nan,nan,nan,nan";
            }
            os << ',' << format_double(r.threshold) << ',' << flag(r.pass) << '\n';
        }
    }
}

void write_smp_csv(std::ostream& os, const SMPReport& report, double dt)
{
    os << "# schema: smplab/smp v1\n"
       << "step,t,v,gap,gap_se,p05\n";
    for (const auto& s : report.samples) {
        os << s.step << ',' << format_double(static_cast<double>(s.step) * dt) << ',' << s.v.to_string() << ','
           << format_double(s.gap.mean) << ',' << format_double(s.gap.se) << ',' << format_double(s.p05) << '\n';
    }
}

std::string format_blocks(const std::vector<ControlPoint>& blocks)
{
    std::string s;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i > 0) {
            s += ';';
        }
        s += blocks[i].to_string();
    }
    return s;
}

void write_brute_force_csv(std::ostream& os, const BruteForceResult& result)
{
    os << "# schema: smplab/brute_force v1\n"
       << "candidate,blocks,J,J_se,excluded,tie\n";
    for (std::size_t i = 0; i < result.table.size(); ++i) {
        const Candidate& c = result.table[i];
        os << i << ',' << format_blocks(c.blocks) << ',' << format_double(c.J.mean) << ','
           << format_double(c.J.se) << ',' << flag(c.excluded) << ',' << flag(c.tie) << '\n';
    }
}

void write_regression_csv(std::ostream& os, const std::vector<RegressionDiagnostics>& diagnostics)
{
    os << "# schema: smplab/regression v1\n"
       << "target,step,condition,r2,features\n";
    for (const auto& d : diagnostics) {
        os << d.target << ',' << d.step << ',' << format_double(d.condition) << ',' << format_double(d.r2) << ','
           << d.features << '\n';
    }
}

void write_cauchy_csv(std::ostream& os, const CauchyReport& report)
{
    os << "# schema: smplab/cauchy v1\n"
       << "eta,apriori,terminal_distance,increment_l2,increment_sup,distance_l2,distance_sup\n";
    for (std::size_t i = 0; i < report.eta.size(); ++i) {
        os << format_double(report.eta[i]) << ',' << format_double(report.apriori[i]) << ','
           << format_double(report.terminal_distance[i]) << ',';
        if (i > 0) {
            os << format_double(report.increments[i - 1].l2) << ','
               << format_double(report.increments[i - 1].sup_hminus1);
        } else {
            os << "nan,nan";
        }
        os << ',' << format_double(report.distance_to_limit[i].l2) << ','
           << format_double(report.distance_to_limit[i].sup_hminus1) << '\n';
    }
}

} // namespace smplab
