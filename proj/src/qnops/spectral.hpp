#ifndef QNOPS_SPECTRAL_HPP
#define QNOPS_SPECTRAL_HPP

#include <optional>
#include <string>
#include <vector>

#include "qnops/trunc_operator.hpp"

namespace qnops {

/// One clustered eigenvalue of (T*T)^{1/2} with its eigenspace.
struct ModulusGroup {
    double value = 0.0;                 ///< representative eigenvalue (cluster mean)
    int multiplicity = 0;
    std::vector<HCoeffVec> eigenbasis;  ///< orthonormal, mutually orthogonal across groups
};

/// Grouped spectrum of the operator modulus (T*T)^{1/2} on the trusted
/// window.  Eigenvalues within group_tol of 1 are pooled into
/// unital_dim; the kernel multiplicity is reported separately (and also
/// appears as the value-0 group when present).
struct ModulusSpectrum {
    std::vector<ModulusGroup> groups;   ///< non-unital clusters, ascending
    int unital_dim = 0;
    int kernel_dim = 0;
    std::vector<HCoeffVec> unital_basis;
    int window = 0;
};

ModulusSpectrum modulus_spectrum(const TruncOperator& T, const Tolerances& tol);

/// Normal form of a quasinormal isometry-plus-compact operator: a
/// diagonal block (entries grouped by modulus) plus an isometric block
/// flagged by c in {0, 1}.
struct DiagIsometryForm {
    std::vector<cplx> diag_entries;        ///< beta * e^{i t}, grouped by modulus, phases ascending
    int c_flag = 0;
    std::vector<HCoeffVec> diag_basis;     ///< basis on which T acts diagonally
    std::vector<HCoeffVec> isometry_basis; ///< basis of the unital summand
    double residual = 0.0;                 ///< max deviation from diagonal/isometric structure
};

DiagIsometryForm extract_decomposition(const TruncOperator& T, const Tolerances& tol);

/// Isometric summand choice for synthesize().
struct IsometrySpec {
    enum Kind { none, shift, matrix } kind = shift;
    int shift_multiplicity = 1;
    Eigen::MatrixXcd block;  ///< used when kind == matrix; must be an isometry
};

struct SynthesisResult {
    TruncOperator op;
    TruncOperator isometry_part;  ///< U_P (+) cU
    TruncOperator compact_part;   ///< diag(entries - phases) (+) 0
};

/// Converse construction: assemble D (+) cU block-diagonally, split it
/// as isometry + compact, and certify quasinormality of the result.
SynthesisResult synthesize(const std::vector<cplx>& diag_entries, const IsometrySpec& iso, int N,
                           const Tolerances& tol);

/// A nontrivial proper subspace commuting with T (orthonormal basis),
/// found from the defect range or from a proper eigenspace of the
/// modulus.  Requires a non-isometric quasinormal isometry-plus-compact
/// input.
std::vector<HCoeffVec> reducing_subspace(const TruncOperator& T, const Tolerances& tol);

} // namespace qnops

#endif
