#include "qnops/blaschke.hpp"

#include <cmath>

#include "qnops/errors.hpp"

namespace qnops {

namespace {

constexpr double kDiskMargin = 1e-6;

void require_in_disk(cplx a, const char* what) {
    if (!(std::abs(a) < 1.0))
        throw DomainError(std::string(what) + ": point must lie in the open unit disk");
}

} // namespace

BlaschkeProduct::BlaschkeProduct(std::vector<cplx> zs, cplx c) : zeros(std::move(zs)), unimodular_const(c) {
    for (const auto& z : zeros) require_in_disk(z, "BlaschkeProduct");
    double m = std::abs(unimodular_const);
    if (std::abs(m - 1.0) > 1e-9)
        throw DomainError("BlaschkeProduct: constant must be unimodular");
}

HCoeffVec BlaschkeProduct::expand(int truncation) const {
    HCoeffVec out = HCoeffVec::polynomial({unimodular_const});
    for (const auto& z : zeros)
        out = resized(multiply(out, blaschke_factor(z, truncation)), truncation);
    return out;
}

HCoeffVec szego_kernel(cplx alpha, int truncation) {
    require_in_disk(alpha, "szego_kernel");
    if (truncation <= 0) throw DomainError("szego_kernel: truncation must be positive");
    std::vector<cplx> c(static_cast<std::size_t>(truncation));
    cplx ac = std::conj(alpha);
    cplx p = 1.0;
    for (auto& x : c) {
        x = p;
        p *= ac;
    }
    TailBound t;
    if (alpha != cplx(0.0)) t = TailBound{1.0, std::abs(alpha)};
    return HCoeffVec(std::move(c), t);
}

HCoeffVec blaschke_factor(cplx alpha, int truncation) {
    require_in_disk(alpha, "blaschke_factor");
    if (truncation <= 0) throw DomainError("blaschke_factor: truncation must be positive");
    if (alpha == cplx(0.0)) return HCoeffVec::monomial(1);

    // (z - alpha) * sum conj(alpha)^n z^n: constant term -alpha, then
    // conj(alpha)^(n-1) * (1 - |alpha|^2).
    const double a2 = std::norm(alpha);
    std::vector<cplx> c(static_cast<std::size_t>(truncation));
    c[0] = -alpha;
    cplx p = 1.0;
    for (std::size_t n = 1; n < c.size(); ++n) {
        c[n] = p * (1.0 - a2);
        p *= std::conj(alpha);
    }
    double aa = std::abs(alpha);
    return HCoeffVec(std::move(c), TailBound{(1.0 - a2) / aa, aa});
}

HCoeffVec blaschke_kernel_product(cplx alpha, int power, int truncation) {
    require_in_disk(alpha, "blaschke_kernel_product");
    if (power < 0 || power > 2) throw DomainError("blaschke_kernel_product: power must be 0, 1 or 2");
    HCoeffVec out = szego_kernel(alpha, truncation);
    for (int p = 0; p < power; ++p)
        out = resized(multiply(out, blaschke_factor(alpha, truncation)), truncation);
    return out;
}

BoundedValue evaluate(const HCoeffVec& f, cplx w) {
    if (!(std::abs(w) <= 1.0 - kDiskMargin))
        throw DomainError("evaluate: point must satisfy |w| <= 1 - 1e-6");
    BoundedValue out;
    cplx p = 1.0;
    for (std::size_t n = 0; n < f.length(); ++n) {
        out.value += f.coeff(n) * p;
        p *= w;
    }
    const TailBound& t = f.tail();
    if (!t.exact()) {
        double rw = t.ratio * std::abs(w);
        out.error_bound =
            t.constant * std::pow(rw, static_cast<double>(f.length())) / (1.0 - rw);
    }
    return out;
}

HCoeffVec backward_shift(const HCoeffVec& f) {
    if (f.length() == 0) return HCoeffVec();
    std::vector<cplx> c(f.coeffs().begin() + 1, f.coeffs().end());
    TailBound t = f.tail();
    t.constant *= t.ratio;
    return HCoeffVec(std::move(c), t);
}

HCoeffVec backward_shift(const HCoeffVec& f, std::size_t k) {
    HCoeffVec out = f;
    for (std::size_t i = 0; i < k; ++i) out = backward_shift(out);
    return out;
}

} // namespace qnops
