#pragma once

#include <string>

#include "smplab/adjoint/adjoint.hpp"

namespace smplab {

struct OracleReport {
    std::string id;
    double relative_error = 0.0;
    double tol = 0.0;
    std::size_t worst_step = 0;
    bool pass = false;
};

/// Zero-noise scenario: regressed ptilde on path 0 against the dense
/// backward sweep, max_k |error_k| / max_k |oracle_k| in L2.
OracleReport check_oracle_p(const Scenario& s, const BackwardPair1& pq, double tol = 1e-3);
/// Same for Ptilde with the terminal data of PQ.
OracleReport check_oracle_P(const Scenario& s, const BackwardPair1& pq, const BackwardPair2& PQ, double tol = 1e-3);
/// Affine scenario: (sum dt E|ptilde - (G x + g)|^2)^(1/2) relative to the
/// same norm of the ansatz, over all paths of the training ensemble.
OracleReport check_oracle_affine(const Scenario& s, const BackwardPair1& pq, const ControlProcess& u,
                                 double tol = 0.02);

} // namespace smplab
