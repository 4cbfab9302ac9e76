#include "qnops/hardy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "qnops/errors.hpp"

namespace qnops {

HCoeffVec::HCoeffVec(std::vector<cplx> coeffs, TailBound tail)
    : coeffs_(std::move(coeffs)), tail_(tail) {
    if (tail_.constant < 0.0)
        throw DomainError("tail constant must be nonnegative");
    if (tail_.constant > 0.0 && !(tail_.ratio >= 0.0 && tail_.ratio < 1.0))
        throw DomainError("tail ratio must lie in [0,1)");
    if (tail_.constant == 0.0)
        tail_.ratio = 0.0;
}

HCoeffVec HCoeffVec::monomial(std::size_t degree, cplx s) {
    std::vector<cplx> c(degree + 1, cplx(0.0));
    c[degree] = s;
    return HCoeffVec(std::move(c));
}

double HCoeffVec::coeff_bound(std::size_t n) const {
    if (n < coeffs_.size()) return std::abs(coeffs_[n]);
    if (tail_.exact()) return 0.0;
    return tail_.constant * std::pow(tail_.ratio, static_cast<double>(n));
}

bool HCoeffVec::is_zero(double eps) const {
    for (const auto& c : coeffs_)
        if (std::abs(c) > eps) return false;
    if (!tail_.exact()) {
        // l2 mass of the certified tail
        double r2 = tail_.ratio * tail_.ratio;
        double mass = tail_.constant * std::pow(tail_.ratio, static_cast<double>(coeffs_.size())) /
                      std::sqrt(1.0 - r2);
        if (mass > eps) return false;
    }
    return true;
}

std::size_t HCoeffVec::tail_safe_length(double target) const {
    if (tail_.exact()) return coeffs_.size();
    std::size_t n = coeffs_.size();
    double geom = 1.0 / (1.0 - tail_.ratio);
    while (tail_.constant * std::pow(tail_.ratio, static_cast<double>(n)) * geom >= target) {
        ++n;
        if (n > 1u << 20)
            throw TruncationError("tail ratio too close to 1 for the requested target");
    }
    return n;
}

BoundedValue inner_product(const HCoeffVec& f, const HCoeffVec& g) {
    const std::size_t lf = f.length(), lg = g.length();
    const std::size_t lo = std::min(lf, lg), hi = std::max(lf, lg);

    BoundedValue out;
    for (std::size_t n = 0; n < lo; ++n)
        out.value += f.coeff(n) * std::conj(g.coeff(n));

    // Between the two truncation lengths one factor is stored exactly
    // and the other only bounded.
    double err = 0.0;
    for (std::size_t n = lo; n < hi; ++n)
        err += f.coeff_bound(n) * g.coeff_bound(n);

    // Joint geometric tail beyond both arrays.
    const TailBound& tf = f.tail();
    const TailBound& tg = g.tail();
    if (!tf.exact() && !tg.exact()) {
        double r = tf.ratio * tg.ratio;
        err += tf.constant * tg.constant * std::pow(r, static_cast<double>(hi)) / (1.0 - r);
    }
    out.error_bound = err;
    return out;
}

BoundedValue norm_squared(const HCoeffVec& f) { return inner_product(f, f); }

double norm(const HCoeffVec& f) {
    double s = 0.0;
    for (const auto& c : f.coeffs()) s += std::norm(c);
    return std::sqrt(s);
}

HCoeffVec add(const HCoeffVec& f, const HCoeffVec& g) {
    std::vector<cplx> c(std::max(f.length(), g.length()), cplx(0.0));
    for (std::size_t n = 0; n < c.size(); ++n) c[n] = f.coeff(n) + g.coeff(n);
    TailBound t;
    if (!f.tail().exact() || !g.tail().exact()) {
        t.ratio = std::max(f.tail().ratio, g.tail().ratio);
        t.constant = f.tail().constant + g.tail().constant;
    }
    return HCoeffVec(std::move(c), t);
}

HCoeffVec scale(const HCoeffVec& f, cplx s) {
    std::vector<cplx> c(f.coeffs());
    for (auto& x : c) x *= s;
    TailBound t = f.tail();
    t.constant *= std::abs(s);
    return HCoeffVec(std::move(c), t);
}

HCoeffVec subtract(const HCoeffVec& f, const HCoeffVec& g) { return add(f, scale(g, -1.0)); }

HCoeffVec forward_shift(const HCoeffVec& f, std::size_t m) {
    std::vector<cplx> c(f.length() + m, cplx(0.0));
    for (std::size_t n = 0; n < f.length(); ++n) c[n + m] = f.coeff(n);
    TailBound t = f.tail();
    if (!t.exact() && t.ratio > 0.0)
        t.constant *= std::pow(t.ratio, -static_cast<double>(m));
    else
        t = TailBound{};
    return HCoeffVec(std::move(c), t);
}

HCoeffVec multiply(const HCoeffVec& f, const HCoeffVec& g) {
    if (f.length() == 0 || g.length() == 0) return HCoeffVec();
    std::vector<cplx> c(f.length() + g.length() - 1, cplx(0.0));
    for (std::size_t i = 0; i < f.length(); ++i) {
        if (f.coeff(i) == cplx(0.0)) continue;
        for (std::size_t j = 0; j < g.length(); ++j)
            c[i + j] += f.coeff(i) * g.coeff(j);
    }
    TailBound t;
    if (!f.tail().exact() || !g.tail().exact()) {
        // A convolution of geometric tails obeys |c_n| <= Cf*Cg*(n+1)*r^n
        // with r the larger ratio.  The linear factor is absorbed by
        // bumping the ratio to r' = (1+r)/2 and paying the finite
        // supremum of (n+1)*(r/r')^n in the constant.
        double r = std::max(f.tail().ratio, g.tail().ratio);
        double rp = 0.5 * (1.0 + r);
        double x = r / rp, sup = 1.0, term = 1.0;
        for (std::size_t n = 1; n < 4096; ++n) {
            term = (static_cast<double>(n) + 1.0) * std::pow(x, static_cast<double>(n));
            if (term <= sup && n > 2) break;
            sup = std::max(sup, term);
        }
        // Stored coefficients also participate; bound them by their max
        // against the nominal geometric profile.
        double mf = f.tail().constant, mg = g.tail().constant;
        for (std::size_t n = 0; n < f.length(); ++n)
            mf = std::max(mf, std::abs(f.coeff(n)) / std::pow(std::max(r, 1e-300), static_cast<double>(n)));
        for (std::size_t n = 0; n < g.length(); ++n)
            mg = std::max(mg, std::abs(g.coeff(n)) / std::pow(std::max(r, 1e-300), static_cast<double>(n)));
        t.ratio = rp;
        t.constant = mf * mg * sup;
    }
    return HCoeffVec(std::move(c), t);
}

HCoeffVec resized(const HCoeffVec& f, std::size_t n) {
    std::vector<cplx> c(n, cplx(0.0));
    for (std::size_t i = 0; i < std::min(n, f.length()); ++i) c[i] = f.coeff(i);
    TailBound t = f.tail();
    if (n < f.length()) {
        // Dropped coefficients have to stay covered by the certificate.
        double ratio = t.exact() ? 0.5 : t.ratio;
        double cst = t.constant;
        for (std::size_t i = n; i < f.length(); ++i) {
            double a = std::abs(f.coeff(i));
            if (a > 0.0)
                cst = std::max(cst, a / std::pow(ratio, static_cast<double>(i)));
        }
        if (cst > 0.0) t = TailBound{cst, ratio};
    }
    return HCoeffVec(std::move(c), t);
}

namespace {

// Plain coefficient dot product over the stored arrays (certified tails
// are assumed negligible by the callers below, which operate inside a
// fixed truncation).
cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s(0.0);
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * std::conj(b[i]);
    return s;
}

double vnorm(const std::vector<cplx>& a) {
    double s = 0.0;
    for (const auto& x : a) s += std::norm(x);
    return std::sqrt(s);
}

} // namespace

std::vector<HCoeffVec> orthonormalize(const std::vector<HCoeffVec>& vectors, const Tolerances& tol) {
    if (vectors.empty()) return {};
    std::size_t len = 0;
    double max_ratio = 0.0;
    for (const auto& v : vectors) {
        len = std::max(len, v.length());
        max_ratio = std::max(max_ratio, v.tail().ratio);
    }

    const std::size_t m = vectors.size();
    std::vector<std::vector<cplx>> work(m);
    // weight[i][j]: coefficient of input j in working vector i, used to
    // propagate tail certificates through the elimination.
    std::vector<std::vector<cplx>> weight(m, std::vector<cplx>(m, cplx(0.0)));
    for (std::size_t i = 0; i < m; ++i) {
        work[i].assign(len, cplx(0.0));
        for (std::size_t n = 0; n < vectors[i].length(); ++n) work[i][n] = vectors[i].coeff(n);
        weight[i][i] = 1.0;
    }

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < m; ++i) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t q : kept) {
                cplx c = dot(work[i], work[q]);
                for (std::size_t n = 0; n < len; ++n) work[i][n] -= c * work[q][n];
                for (std::size_t j = 0; j < m; ++j) weight[i][j] -= c * weight[q][j];
            }
        }
        double nrm = vnorm(work[i]);
        if (nrm < tol.rank_tol) continue;
        for (auto& x : work[i]) x /= nrm;
        for (auto& w : weight[i]) w /= nrm;
        kept.push_back(i);
    }

    std::vector<HCoeffVec> out;
    out.reserve(kept.size());
    for (std::size_t i : kept) {
        TailBound t;
        if (max_ratio > 0.0) {
            double cst = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                cst += std::abs(weight[i][j]) * vectors[j].tail().constant;
            if (cst > 0.0) t = TailBound{cst, max_ratio};
        }
        out.emplace_back(work[i], t);
    }
    return out;
}

std::vector<HCoeffVec> complement_basis(const std::vector<HCoeffVec>& vectors, int truncation,
                                        const Tolerances& tol) {
    if (truncation <= 0) throw DomainError("complement_basis: truncation must be positive");
    const std::size_t N = static_cast<std::size_t>(truncation);

    for (const auto& v : vectors) {
        if (v.tail_safe_length(tol.tail_target) > N)
            throw TruncationError("insufficient truncation for the declared tails",
                                  static_cast<int>(v.tail_safe_length(tol.tail_target)));
        if (v.length() > N)
            for (std::size_t n = N; n < v.length(); ++n)
                if (std::abs(v.coeff(n)) > tol.tail_target)
                    throw TruncationError("insufficient truncation: stored support exceeds window");
    }

    Eigen::MatrixXcd A(N, std::max<std::size_t>(vectors.size(), 1));
    A.setZero();
    for (std::size_t j = 0; j < vectors.size(); ++j)
        for (std::size_t n = 0; n < std::min(N, vectors[j].length()); ++n)
            A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = vectors[j].coeff(n);

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullU);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol.rank_tol) ++rank;

    std::vector<HCoeffVec> out;
    const auto& U = svd.matrixU();
    for (Eigen::Index j = rank; j < U.cols(); ++j) {
        std::vector<cplx> c(N);
        for (std::size_t n = 0; n < N; ++n) c[n] = U(static_cast<Eigen::Index>(n), j);
        out.emplace_back(std::move(c));
    }
    return out;
}

} // namespace qnops
