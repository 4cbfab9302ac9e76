#ifndef QNOPS_CNU_HPP
#define QNOPS_CNU_HPP

#include <vector>

#include "qnops/trunc_operator.hpp"

namespace qnops {

/// Adapted-basis data of a contraction with finite defect indices,
/// written (against that basis) as shift-of-multiplicity-k plus finite
/// rank.  The first n basis columns span the defect space of T, the
/// next k its orthogonal increment inside the defect space of T*; the
/// remaining columns are generated by iterating T, which acts as the
/// abstract shift off the defect space.
struct CnuFiniteRank {
    int n = 0;  ///< dim of the defect space of T
    int k = 0;  ///< dim of (defect space of T*) minus (defect space of T)
    int r_max = 2;
    int window = 0;

    Eigen::MatrixXcd basis;  ///< N x materialized adapted basis columns
    int extra = 0;           ///< extra columns absorbing any leakage of T(defect space)

    TruncOperator f1;                  ///< T on the defect space, zero on its complement
    TruncOperator f;                   ///< F = F1 - S_k P_n against the adapted basis
    std::vector<TruncOperator> fr_cache;  ///< F_r for r = 1..r_max
};

/// Decompose a contraction with contained defect spaces.  Throws
/// DomainError when T is not a contraction or the defect containment
/// fails (the message names the violating vector index).
CnuFiniteRank split_cnu(const TruncOperator& T, const Tolerances& tol);

/// The four structural conditions every c.n.u. contraction of this
/// class satisfies.  Reports, never throws.
struct PropCharReport {
    bool rank_condition = false;       ///< rank(P_n - F1*F1) = n
    double rank_gap = 0.0;             ///< smallest |eigenvalue| of P_n - F1*F1 on the defect block
    bool support_condition = false;    ///< F1(I-P_n) = (I-P_{n+k})F1 = 0
    double support_right = 0.0;        ///< ||F1 (I-P_n)||
    double support_left_nk = 0.0;      ///< ||(I-P_{n+k}) F1||
    double support_left_n = 0.0;       ///< ||(I-P_n) F1||  (the sharpened variant)
    bool support_condition_sharp = false;
    bool lambda_condition = false;     ///< exists lambda >= 0 making the pencil PSD
    double lambda_witness = 0.0;
    double lambda_best_min_eig = 0.0;
    bool power_condition = false;      ///< ||F_r x|| <= ||P_n x||, ||F_r* x|| <= ||P_{n+kr} x||
    double worst_power_gap = 0.0;      ///< max over r of (sigma_max - 1)
    bool strictness_probe = false;     ///< no common unit solution of both equalities found

    bool all() const {
        return rank_condition && support_condition && lambda_condition && power_condition &&
               strictness_probe;
    }
};

PropCharReport check_prop_char(const CnuFiniteRank& c, const Tolerances& tol);

/// Quasinormality criterion for the same class: the defect-block
/// operator is normal, supported inside the defect space on both sides,
/// and a strict contraction in every power.
struct CnuQuasinormalReport {
    bool rank_condition = false;
    bool support_condition = false;  ///< F1(I-P_n) = (I-P_n)F1 = 0
    double support_residual = 0.0;
    bool normal_condition = false;
    double normality_residual = 0.0;  ///< ||F1*F1 - F1 F1*||
    bool strict_power_condition = false;
    double max_power_sigma = 0.0;
    bool verdict = false;
    double oracle_residual = 0.0;  ///< independent commutator residual of the input operator
};

CnuQuasinormalReport check_cnu_quasinormal(const CnuFiniteRank& c, const TruncOperator& T,
                                           const Tolerances& tol);

/// Contraction with one-dimensional defect space: first column carries
/// the scalars (requires sum |alpha_i|^2 < 1), every later column acts
/// as the shift of multiplicity k = len(alphas) - 1.
TruncOperator dim1_matrix(const std::vector<cplx>& alphas, int N,
                          const Tolerances& tol = Tolerances::defaults());

} // namespace qnops

#endif
