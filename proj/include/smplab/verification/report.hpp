#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "smplab/adjoint/adjoint.hpp"
#include "smplab/verification/duality.hpp"
#include "smplab/verification/rates.hpp"
#include "smplab/verification/smp.hpp"

namespace smplab {

/// One line per check on standard output:
///   VERDICT id=<id> result=PASS|FAIL stat=<value> tol=<value> [note=<text>]
/// `stat` is "undefined" when no statistic could be formed.
struct Verdict {
    std::string id;
    bool pass = false;
    std::string stat;
    std::string tol;
    std::string note; // spaces are written as '_'
};

std::string format_verdict(const Verdict& v);
/// Parses a line produced by format_verdict; false for anything else.
bool parse_verdict(const std::string& line, Verdict& out);

Verdict verdict_of(const DualityReport& r);
Verdict verdict_of(const RateReport& r);
Verdict verdict_of(const SMPReport& r, const std::string& id);

/// Fixed width table of verdicts with a final pass count line.
void write_summary(std::ostream& os, const std::vector<Verdict>& verdicts);

// CSV writers. Each starts with "# schema: smplab/<name> v1" and a header row.
//   duality: id,probe,lhs,lhs_se,rhs,rhs_se,diff,diff_se,relative_gap,paths,crn,tol,pass
//   rates: kind,eps,value,se,slope,slope_se,ci_low,ci_high,threshold,pass
//   smp: step,t,v,gap,gap_se,p05
//   brute_force: candidate,blocks,J,J_se,excluded,tie
//   regression: target,step,condition,r2,features
//   cauchy: eta,apriori,terminal_distance,increment_l2,increment_sup,distance_l2,distance_sup
void write_duality_csv(std::ostream& os, const std::vector<DualityReport>& reports);
void write_rates_csv(std::ostream& os, const std::vector<RateReport>& reports);
void write_smp_csv(std::ostream& os, const SMPReport& report, double dt);
void write_brute_force_csv(std::ostream& os, const BruteForceResult& result);
void write_regression_csv(std::ostream& os, const std::vector<RegressionDiagnostics>& diagnostics);
void write_cauchy_csv(std::ostream& os, const CauchyReport& report);

/// Block values as a compact string, e.g. "1;-1;1".
std::string format_blocks(const std::vector<ControlPoint>& blocks);

} // namespace smplab
