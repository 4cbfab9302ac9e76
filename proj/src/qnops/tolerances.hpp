#ifndef QNOPS_TOLERANCES_HPP
#define QNOPS_TOLERANCES_HPP

#include "qnops/errors.hpp"

namespace qnops {

/// Tolerance budget shared by every numerical decision in the library.
///
/// The four layers are ordered so that each consumes at most a small
/// fraction of the next: certified truncation tails stay below
/// tail_target, numerical rank / null-space cutoffs use rank_tol,
/// eigenvalue clustering uses group_tol, and verdict-level residual
/// comparisons use residual_tol.
struct Tolerances {
    double residual_tol = 1e-8;  ///< commutator / condition residual threshold (norm-scaled)
    double group_tol    = 1e-7;  ///< eigenvalue clustering width
    double rank_tol     = 1e-10; ///< singular-value cutoff for rank and null spaces
    double tail_target  = 1e-12; ///< max allowed truncation-tail contribution

    void validate() const {
        if (!(residual_tol > 0 && group_tol > 0 && rank_tol > 0 && tail_target > 0))
            throw DomainError("tolerances must be strictly positive");
        if (!(tail_target <= rank_tol && rank_tol <= residual_tol))
            throw DomainError("tolerance ordering violated: need tail_target <= rank_tol <= residual_tol");
    }

    static Tolerances defaults() { return Tolerances{}; }
};

} // namespace qnops

#endif
