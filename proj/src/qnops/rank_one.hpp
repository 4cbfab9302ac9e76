#ifndef QNOPS_RANK_ONE_HPP
#define QNOPS_RANK_ONE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnops/blaschke.hpp"
#include "qnops/trunc_operator.hpp"

namespace qnops {

enum class Branch { isometry, dependent, independent };

enum class Classification {
    isometry,
    dependent,
    independent_type1,
    independent_type2,
    independent_other,
    not_quasinormal,
};

std::string to_string(Classification c);

/// Wold-style generators of ker(I - T*T): an orthonormal basis of the
/// kernel minus its image under the shift, restricted to trusted
/// coordinates.
struct WanderingBasis {
    std::vector<HCoeffVec> generators;
    int m = 0;
    std::vector<HCoeffVec> kernel_basis_window;
    bool shift_invariant = false;  ///< S_k ker(I-T*T) stayed inside the kernel
    double invariance_gap = 0.0;
    bool isometry_convention = false;  ///< kernel was everything; generators are monomials
};

WanderingBasis kernel_wandering(const TruncOperator& T, const Tolerances& tol);

/// Diagnostic scalars attached to a verdict.
struct Certificate {
    std::vector<cplx> theta_zeros;
    std::vector<HCoeffVec> generators;
    std::optional<Eigen::Matrix2cd> a_matrix;
    std::map<std::string, cplx> scalars;
};

/// Checker verdict with per-condition residuals and the independent
/// brute-force commutator residual.  Construction enforces the sound
/// direction: a true verdict with a failing oracle raises a
/// ConsistencyAlarm instead of returning.
struct CheckReport {
    bool verdict = false;
    std::map<std::string, double> condition_residuals;
    double oracle_residual = 0.0;
    Classification classification = Classification::not_quasinormal;
    Certificate certificate;
};

CheckReport finalize_report(CheckReport rep, const Tolerances& tol);

/// Branch decision between the dependent and independent case of
/// {v, S_k*u}; the threshold is a fixed 1e-8 principal-angle margin.
Branch decide_branch(const TruncOperator& T, const Tolerances& tol);
double branch_angle(const TruncOperator& T);

/// Degree <= 2 inner function whose multiples form ker(I - T*T), fitted
/// from the coefficient recurrence of span{v, S*u} and validated by
/// re-orthogonality.  Requires shift multiplicity 1 and a quasinormal
/// input (by the independent oracle).
BlaschkeProduct beurling_theta(const TruncOperator& T, const Tolerances& tol);

CheckReport check_dependent(const TruncOperator& T, const Tolerances& tol,
                            bool enforce_branch = true);

/// Multiplicity-one corollary form: v must be a kernel-function
/// multiple and the scalar identity at its parameter must hold.
CheckReport check_dependent_shift(const TruncOperator& T, const Tolerances& tol,
                                  bool enforce_branch = true);

/// Multiplicity-two corollary for linear v = a + bz with dependent
/// {v, S*^2 u}.
CheckReport check_s2_linear(const TruncOperator& T, const Tolerances& tol,
                            bool enforce_branch = true);

/// The four pairing scalars and the 2x2 matrix of the independent-case
/// characterization.
struct IndependentInvariants {
    cplx r0, r1, s0, s1;
    Eigen::Matrix2cd a_matrix;
    double normality_residual = 0.0;  ///< ||A*A - AA*|| / max(1, ||A||_F^2)
};

IndependentInvariants independent_invariants(const TruncOperator& T, const Tolerances& tol,
                                             bool enforce_branch = true);

CheckReport check_independent(const TruncOperator& T, const Tolerances& tol,
                              bool enforce_branch = true);

/// Double-zero refinement (multiplicity one).  A candidate parameter
/// may be supplied; otherwise it is fitted from the kernel's inner
/// function.
CheckReport check_type1(const TruncOperator& T, const Tolerances& tol,
                        std::optional<cplx> alpha = std::nullopt);

/// Distinct-zeros refinement (multiplicity one).  Throws BranchError
/// when the two zeros coincide within group_tol (use check_type1).
CheckReport check_type2(const TruncOperator& T, const Tolerances& tol,
                        std::optional<std::pair<cplx, cplx>> zeros = std::nullopt);

/// Full routing: isometry / dependent / independent, with the
/// multiplicity-one type refinement and borderline double-checks.
CheckReport check_rank_one(const TruncOperator& T, const Tolerances& tol);

struct GeneratedInstance {
    HCoeffVec u, v;
    TruncOperator op;
};

/// Dependent-branch generator: u = u0 + c_scale * z^k * kernel, v a
/// kernel multiple solving the scalar identity.  Throws DomainError
/// when the identity is unsolvable (degenerate data).
GeneratedInstance generate_dependent(cplx alpha, cplx u0, cplx c_scale, int N,
                                     const Tolerances& tol);

/// Isometric perturbation: v = (e^{it} - 1) S_k* u with ||u|| = 1
/// (input is normalized).  Requires S_k* u != 0 and e^{it} != 1.
GeneratedInstance generate_isometry(int k, double t, const HCoeffVec& u, int N,
                                    const Tolerances& tol);

/// Numeric solver outcomes for the independent-case generators: either
/// an instance passing its own checker and the oracle, or a typed
/// failure (never a fabricated instance).
struct GenerationOutcome {
    std::optional<GeneratedInstance> instance;
    std::string failure;
    bool ok() const { return instance.has_value(); }
};

GenerationOutcome generate_type1(cplx alpha, std::uint64_t seed, int N, const Tolerances& tol);
GenerationOutcome generate_type2(cplx alpha, cplx beta, std::uint64_t seed, int N,
                                 const Tolerances& tol);

} // namespace qnops

#endif
