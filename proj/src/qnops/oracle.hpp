#ifndef QNOPS_ORACLE_HPP
#define QNOPS_ORACLE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qnops/trunc_operator.hpp"

namespace qnops {
namespace oracle {

/// Commutator residual max_n ||(T*T - TT*) T e_n|| / max(1, colmax)^3
/// computed by naive triple loops over the raw matrix entries.  This is
/// deliberately an independent arithmetic path: it shares nothing with
/// quasinormal_residual beyond the matrix container.
double brute_residual(const TruncOperator& T);

struct KernelData {
    int rank = 0;
    std::vector<HCoeffVec> null_basis;
};

/// SVD-based numerical rank and orthonormal null basis.
KernelData brute_kernel(const Eigen::MatrixXcd& M, const Tolerances& tol);

/// One randomized trial of a checker-vs-oracle comparison.
struct TrialRecord {
    std::string instance_spec;  ///< JSON echo of the sampled instance
    bool checker_verdict = false;
    bool oracle_verdict = false;
    std::map<std::string, double> residuals;
    std::uint64_t seed = 0;
    bool agree() const { return checker_verdict == oracle_verdict; }
};

enum class Family { dependent, independent, type1, type2, cnu_dim1, synthesize };

Family family_from_string(const std::string& s);
std::string to_string(Family f);

struct SuiteResult {
    std::vector<TrialRecord> records;
    int agreements = 0;
    int trials = 0;
    bool passed() const { return trials > 0 && agreements == trials; }
};

/// Deterministic randomized equivalence harness: half the trials are
/// generated to pass, half perturbed to fail with the oracle residual
/// escalated at least 100x above threshold.  Any checker/oracle
/// disagreement fails the suite and serializes the offending record.
SuiteResult equivalence_suite(Family family, int trials, std::uint64_t seed, int truncation,
                              const Tolerances& tol);

} // namespace oracle
} // namespace qnops

#endif
