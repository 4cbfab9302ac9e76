#ifndef QNOPS_TRUNC_OPERATOR_HPP
#define QNOPS_TRUNC_OPERATOR_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "qnops/hardy.hpp"
#include "qnops/tolerances.hpp"

namespace qnops {

/// Ingredients of a rank-one perturbed shift, kept alongside the
/// truncation so downstream checkers can reach the exact data instead
/// of re-deriving it from matrix entries.
struct RankOneData {
    int k = 1;      ///< shift multiplicity
    HCoeffVec u;    ///< range vector of the rank-one term
    HCoeffVec v;    ///< pairing vector of the rank-one term
};

/// Finite section of an operator against the monomial / abstract basis.
///
/// `exact_window` counts the leading columns on which the stored matrix
/// reproduces the infinite operator's action (up to certified tails
/// below the construction-time tail target).  `step` is the support
/// growth per application: a product of L factors drawn from {T, T*} is
/// trusted on the leading exact_window - L*step columns.
struct TruncOperator {
    Eigen::MatrixXcd mat;
    int exact_window = 0;
    int step = 0;
    std::optional<RankOneData> rank_one;

    int size() const { return static_cast<int>(mat.rows()); }

    /// Number of leading columns certified for a product of `factors`
    /// applications of T / T*.
    int trusted_columns(int factors) const { return exact_window - factors * step; }

    /// Throws TruncationError when the trusted region for a
    /// `factors`-fold product is too small to be meaningful.
    void require_window(int factors, const char* who) const;

    /// max_n ||T e_n||, used as the scale for residual normalization.
    double column_scale() const;
};

/// Unilateral shift of multiplicity k on an N-dimensional truncation.
TruncOperator shift_operator(int k, int N);

/// S_k + u (x) v with certified window metadata.  Requires nonzero u, v
/// and a truncation large enough for their tails.
TruncOperator perturbed_shift(int k, const HCoeffVec& u, const HCoeffVec& v, int N,
                              const Tolerances& tol = Tolerances::defaults());

/// Wrap an explicit matrix (operator = block on the leading coordinates,
/// zero beyond).
TruncOperator matrix_operator(Eigen::MatrixXcd m, int N = -1);

/// Defect operator I - T*T restricted to its certified window together
/// with its numerical range data.
struct DefectData {
    Eigen::MatrixXcd defect_op;           ///< I - T*T on the trusted window
    int defect_rank = 0;
    std::vector<HCoeffVec> range_basis;   ///< orthonormal basis of ran(I - T*T)
    int kernel_dim_in_window = 0;
    double closed_form_gap = 0.0;         ///< rank-one inputs: max entrywise gap vs the assembled closed form
};

DefectData defect(const TruncOperator& T, const Tolerances& tol = Tolerances::defaults());

/// Max over trusted basis columns of ||(T*T - TT*) T e_n||, scaled by
/// max(1, column_scale)^3.  Zero (up to residual_tol) iff T is
/// quasinormal at this truncation.
double quasinormal_residual(const TruncOperator& T);

/// Smallest eigenvalue of the compression of T*T - TT* to the trusted
/// window, scaled by max(1, column_scale)^2.  Nonnegative (up to
/// residual_tol) iff T is hyponormal at this truncation.
double hyponormal_min_eig(const TruncOperator& T);

/// True when ||I - T*T|| vanishes on the trusted window (isometries are
/// quasinormal; callers may skip the commutator residual).
bool is_isometry(const TruncOperator& T, double eps);

/// T = V * M with M = (T*T)^{1/2} (Hermitian eigendecomposition,
/// eigenvalues clamped at zero) and V a partial isometry whose columns
/// vanish on the numerical kernel of M.
struct PolarDecomposition {
    TruncOperator partial_isometry;
    TruncOperator modulus;
};

PolarDecomposition polar_decomposition(const TruncOperator& T,
                                       const Tolerances& tol = Tolerances::defaults());

/// Matrix of the rank-one operator u (x) v on an N-truncation.
Eigen::MatrixXcd rank_one_matrix(const HCoeffVec& u, const HCoeffVec& v, int N);

} // namespace qnops

#endif
