#ifndef QNOPS_BLASCHKE_HPP
#define QNOPS_BLASCHKE_HPP

#include <vector>

#include "qnops/hardy.hpp"

namespace qnops {

/// Finite Blaschke product: unimodular constant times factors
/// (z - a)/(1 - conj(a) z) over zeros a in the open unit disk.
struct BlaschkeProduct {
    std::vector<cplx> zeros;
    cplx unimodular_const{1.0};

    BlaschkeProduct() = default;
    BlaschkeProduct(std::vector<cplx> zs, cplx c = 1.0);

    int degree() const { return static_cast<int>(zeros.size()); }

    /// Coefficient expansion of the product as an H^2 element.
    HCoeffVec expand(int truncation) const;
};

/// Reproducing kernel 1/(1 - conj(alpha) z): coefficient n is
/// conj(alpha)^n, tail certificate (1, |alpha|).
HCoeffVec szego_kernel(cplx alpha, int truncation);

/// Single factor (z - alpha)/(1 - conj(alpha) z).
HCoeffVec blaschke_factor(cplx alpha, int truncation);

/// B_alpha^power * k_alpha for power in {0, 1, 2}: the span vectors of
/// the double-zero characterization and the generator of the associated
/// kernel space.
HCoeffVec blaschke_kernel_product(cplx alpha, int power, int truncation);

/// Point evaluation at |w| < 1 with a certified truncation-tail bound.
BoundedValue evaluate(const HCoeffVec& f, cplx w);

/// Drop the constant term and move every coefficient down one slot
/// (the adjoint of multiplication by z).
HCoeffVec backward_shift(const HCoeffVec& f);

/// backward_shift iterated k times.
HCoeffVec backward_shift(const HCoeffVec& f, std::size_t k);

} // namespace qnops

#endif
