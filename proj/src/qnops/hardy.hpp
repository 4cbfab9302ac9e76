#ifndef QNOPS_HARDY_HPP
#define QNOPS_HARDY_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "qnops/tolerances.hpp"

namespace qnops {

using cplx = std::complex<double>;

/// Geometric bound on the coefficients a function carries beyond its
/// stored truncation: |coeff(n)| <= constant * ratio^n for every
/// n >= stored length.  constant == 0 declares exact finite support.
struct TailBound {
    double constant = 0.0;
    double ratio    = 0.0;
    bool exact() const { return constant == 0.0; }
};

/// An element of the Hardy space H^2 (equivalently, a vector against an
/// abstract orthonormal basis indexed by the nonnegative integers),
/// stored as a finite coefficient array plus a certified tail bound.
/// Immutable after construction.
class HCoeffVec {
public:
    HCoeffVec() = default;
    HCoeffVec(std::vector<cplx> coeffs, TailBound tail = {});

    static HCoeffVec polynomial(std::vector<cplx> coeffs) { return HCoeffVec(std::move(coeffs)); }
    static HCoeffVec monomial(std::size_t degree, cplx scale = 1.0);
    static HCoeffVec zero() { return HCoeffVec(); }

    const std::vector<cplx>& coeffs() const { return coeffs_; }
    const TailBound& tail() const { return tail_; }
    std::size_t length() const { return coeffs_.size(); }

    /// Stored coefficient, 0 beyond the truncation.
    cplx coeff(std::size_t n) const { return n < coeffs_.size() ? coeffs_[n] : cplx(0.0); }

    /// Upper bound on |true coefficient n| valid for every n.
    double coeff_bound(std::size_t n) const;

    bool is_zero(double eps = 0.0) const;

    /// Smallest length L such that the l2 mass certified beyond L stays
    /// under `target` (coefficients past the stored array use the tail
    /// bound; stored coefficients are counted exactly).
    std::size_t tail_safe_length(double target) const;

private:
    std::vector<cplx> coeffs_;
    TailBound tail_;
};

/// Inner-product value together with a rigorous bound on the
/// contribution omitted by truncation.
struct BoundedValue {
    cplx value{0.0};
    double error_bound = 0.0;
};

BoundedValue inner_product(const HCoeffVec& f, const HCoeffVec& g);
BoundedValue norm_squared(const HCoeffVec& f);
double norm(const HCoeffVec& f);

HCoeffVec add(const HCoeffVec& f, const HCoeffVec& g);
HCoeffVec scale(const HCoeffVec& f, cplx s);
HCoeffVec subtract(const HCoeffVec& f, const HCoeffVec& g);

/// Multiplication by z^m: coefficients move up by m slots.
HCoeffVec forward_shift(const HCoeffVec& f, std::size_t m);

/// Coefficient convolution with a sound geometric tail certificate for
/// the product.
HCoeffVec multiply(const HCoeffVec& f, const HCoeffVec& g);

/// Drop or extend the stored array to exactly n coefficients.  Dropped
/// coefficients are folded into the tail certificate so the bound stays
/// valid.
HCoeffVec resized(const HCoeffVec& f, std::size_t n);

/// Modified Gram-Schmidt with one reorthogonalization pass.  Vectors
/// whose residual after projection falls below tol.rank_tol are
/// dropped.  Tail certificates propagate through the elimination
/// weights, so the outputs remain certified.
std::vector<HCoeffVec> orthonormalize(const std::vector<HCoeffVec>& vectors, const Tolerances& tol);

/// Orthonormal basis of the orthogonal complement of span(vectors)
/// inside the N-dimensional truncation.  Requires every input's tail
/// contribution at N to sit below tol.tail_target.
std::vector<HCoeffVec> complement_basis(const std::vector<HCoeffVec>& vectors, int truncation,
                                        const Tolerances& tol);

} // namespace qnops

#endif
