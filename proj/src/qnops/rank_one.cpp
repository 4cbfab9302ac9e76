#include "qnops/rank_one.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qnops/errors.hpp"
#include "qnops/least_squares.hpp"
#include "qnops/oracle.hpp"

namespace qnops {

namespace {

constexpr double kBranchAngleThreshold = 1e-8;

const RankOneData& rank_one_data(const TruncOperator& T, const char* who) {
    if (!T.rank_one)
        throw DomainError(std::string(who) + ": operator does not carry rank-one perturbation data");
    return *T.rank_one;
}

HCoeffVec project_onto(const HCoeffVec& w, const std::vector<HCoeffVec>& onb) {
    HCoeffVec out = HCoeffVec::zero();
    for (const auto& b : onb) out = add(out, scale(b, inner_product(w, b).value));
    return out;
}

double residual_off_span(const HCoeffVec& w, const std::vector<HCoeffVec>& onb) {
    return norm(subtract(w, project_onto(w, onb)));
}

double normality_residual_2x2(const Eigen::Matrix2cd& M) {
    Eigen::Matrix2cd c = M.adjoint() * M - M * M.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(c, Eigen::EigenvaluesOnly);
    double nrm = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(1)));
    return nrm / std::max(1.0, M.squaredNorm());
}

double defect_norm(const TruncOperator& T) {
    T.require_window(2, "defect_norm");
    const int w = T.trusted_columns(2);
    Eigen::MatrixXcd d = (T.mat.adjoint() * T.mat).topLeftCorner(w, w) -
                         Eigen::MatrixXcd::Identity(w, w);
    double m = 0.0;
    for (int j = 0; j < w; ++j) m = std::max(m, d.col(j).norm());
    return m;
}

} // namespace

std::string to_string(Classification c) {
    switch (c) {
        case Classification::isometry: return "isometry";
        case Classification::dependent: return "dependent";
        case Classification::independent_type1: return "independent-type-I";
        case Classification::independent_type2: return "independent-type-II";
        case Classification::independent_other: return "independent-other";
        case Classification::not_quasinormal: return "not-quasinormal";
    }
    return "unknown";
}

CheckReport finalize_report(CheckReport rep, const Tolerances& tol) {
    if (rep.verdict && rep.oracle_residual > tol.residual_tol)
        throw ConsistencyAlarm("checker verdict is true but the oracle residual is " +
                               std::to_string(rep.oracle_residual));
    return rep;
}

double branch_angle(const TruncOperator& T) {
    const auto& r = rank_one_data(T, "branch_angle");
    HCoeffVec su = backward_shift(r.u, static_cast<std::size_t>(r.k));
    double nsu = norm(su);
    if (nsu == 0.0) return 0.0;  // {v, 0} counts as dependent
    double nv = norm(r.v);
    cplx cross = inner_product(su, r.v).value;
    HCoeffVec rem = subtract(su, scale(r.v, cross / (nv * nv)));
    return norm(rem) / nsu;
}

Branch decide_branch(const TruncOperator& T, const Tolerances& tol) {
    if (is_isometry(T, tol.residual_tol)) return Branch::isometry;
    return branch_angle(T) < kBranchAngleThreshold ? Branch::dependent : Branch::independent;
}

WanderingBasis kernel_wandering(const TruncOperator& T, const Tolerances& tol) {
    const auto& r = rank_one_data(T, "kernel_wandering");
    const int k = r.k;
    T.require_window(2, "kernel_wandering");
    const int ambient = T.trusted_columns(2);
    const int inner = ambient - k;
    if (inner < 4 * k + 4)
        throw TruncationError("kernel_wandering: increase truncation", T.size() + (4 * k + 4 - inner));

    WanderingBasis out;

    if (is_isometry(T, tol.residual_tol)) {
        // kernel is everything; the canonical generators are the first
        // k monomials
        out.isometry_convention = true;
        out.shift_invariant = true;
        out.m = k;
        for (int i = 0; i < k; ++i) out.generators.push_back(HCoeffVec::monomial(static_cast<std::size_t>(i)));
        return out;
    }

    HCoeffVec su = backward_shift(r.u, static_cast<std::size_t>(k));
    std::vector<HCoeffVec> span_vectors{r.v};
    if (!su.is_zero(tol.rank_tol)) span_vectors.push_back(su);

    auto kernel_small = complement_basis(span_vectors, inner, tol);
    auto kernel_big = complement_basis(span_vectors, ambient, tol);
    out.kernel_basis_window = kernel_small;

    // S_k maps the inner-window kernel into the ambient window; the
    // kernel is shift-invariant when nothing leaks off the larger
    // kernel basis.
    std::vector<HCoeffVec> shifted;
    shifted.reserve(kernel_small.size());
    double gap = 0.0;
    for (const auto& f : kernel_small) {
        HCoeffVec sf = forward_shift(f, static_cast<std::size_t>(k));
        gap = std::max(gap, residual_off_span(sf, kernel_big));
        shifted.push_back(std::move(sf));
    }
    out.invariance_gap = gap;
    out.shift_invariant = gap <= tol.residual_tol;
    if (!out.shift_invariant) return out;  // no generators: kernel not shift-invariant

    // wandering part: kernel columns minus their projections onto the
    // shifted kernel (the shifted family is already orthonormal)
    Eigen::Index rows = ambient;
    Eigen::MatrixXcd K(rows, static_cast<Eigen::Index>(kernel_small.size()));
    Eigen::MatrixXcd Z(rows, static_cast<Eigen::Index>(shifted.size()));
    K.setZero();
    Z.setZero();
    for (std::size_t j = 0; j < kernel_small.size(); ++j)
        for (std::size_t n = 0; n < kernel_small[j].length() && n < static_cast<std::size_t>(rows); ++n)
            K(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = kernel_small[j].coeff(n);
    for (std::size_t j = 0; j < shifted.size(); ++j)
        for (std::size_t n = 0; n < shifted[j].length() && n < static_cast<std::size_t>(rows); ++n)
            Z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = shifted[j].coeff(n);

    Eigen::MatrixXcd W = K - Z * (Z.adjoint() * K);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(W, Eigen::ComputeThinU);
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        double s = svd.singularValues()(i);
        if (s > 0.5) {
            std::vector<cplx> c(static_cast<std::size_t>(rows));
            for (Eigen::Index n = 0; n < rows; ++n) c[static_cast<std::size_t>(n)] = svd.matrixU()(n, i);
            out.generators.emplace_back(std::move(c));
        } else if (s > std::sqrt(tol.rank_tol)) {
            throw ConsistencyAlarm("kernel_wandering: ill-separated wandering singular value " +
                                   std::to_string(s));
        }
    }
    out.m = static_cast<int>(out.generators.size());
    if (out.m > k)
        throw ConsistencyAlarm("kernel_wandering: wandering dimension " + std::to_string(out.m) +
                               " exceeds the shift multiplicity " + std::to_string(k));
    return out;
}

BlaschkeProduct beurling_theta(const TruncOperator& T, const Tolerances& tol) {
    const auto& r = rank_one_data(T, "beurling_theta");
    if (r.k != 1) throw DomainError("beurling_theta: requires shift multiplicity 1");
    double ores = oracle::brute_residual(T);
    if (ores > tol.residual_tol)
        throw DomainError("beurling_theta: theta undefined, operator is not quasinormal (residual " +
                          std::to_string(ores) + ")");
    if (is_isometry(T, tol.residual_tol)) return BlaschkeProduct({});  // kernel is everything

    const int L = T.trusted_columns(2);
    HCoeffVec su = backward_shift(r.u, 1);
    auto span = orthonormalize({r.v, su}, tol);
    const int degree = static_cast<int>(span.size());

    // The coefficient sequences of the span satisfy the linear
    // recurrence whose characteristic roots are the conjugated zeros.
    std::vector<std::vector<cplx>> seqs;
    for (const auto& f : {r.v, su}) {
        std::vector<cplx> s(static_cast<std::size_t>(L));
        for (int n = 0; n < L; ++n) s[static_cast<std::size_t>(n)] = f.coeff(static_cast<std::size_t>(n));
        seqs.push_back(std::move(s));
    }
    double biggest = 0.0;
    for (const auto& s : seqs)
        for (const auto& x : s) biggest = std::max(biggest, std::abs(x));
    const double row_floor = 1e-10 * biggest;

    std::vector<cplx> zeros;
    if (degree <= 1) {
        cplx num = 0.0, den = 0.0;
        for (const auto& s : seqs)
            for (int n = 0; n + 1 < L; ++n) {
                if (std::abs(s[static_cast<std::size_t>(n)]) < row_floor) continue;
                num += s[static_cast<std::size_t>(n + 1)] * std::conj(s[static_cast<std::size_t>(n)]);
                den += std::norm(s[static_cast<std::size_t>(n)]);
            }
        if (std::abs(den) == 0.0) throw DomainError("beurling_theta: degenerate span");
        zeros.push_back(std::conj(num / den));
    } else {
        std::vector<Eigen::Vector2cd> lhs;
        std::vector<cplx> rhs;
        for (const auto& s : seqs)
            for (int n = 0; n + 2 < L; ++n) {
                double mag = std::max({std::abs(s[static_cast<std::size_t>(n)]),
                                       std::abs(s[static_cast<std::size_t>(n + 1)]),
                                       std::abs(s[static_cast<std::size_t>(n + 2)])});
                if (mag < row_floor) continue;
                lhs.push_back(Eigen::Vector2cd(s[static_cast<std::size_t>(n + 1)], s[static_cast<std::size_t>(n)]));
                rhs.push_back(s[static_cast<std::size_t>(n + 2)]);
            }
        if (lhs.size() < 2) throw DomainError("beurling_theta: not enough data to fit the recurrence");
        Eigen::MatrixXcd A(static_cast<Eigen::Index>(lhs.size()), 2);
        Eigen::VectorXcd b(static_cast<Eigen::Index>(rhs.size()));
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            A.row(static_cast<Eigen::Index>(i)) = lhs[i].transpose();
            b(static_cast<Eigen::Index>(i)) = rhs[i];
        }
        Eigen::Vector2cd pq = A.colPivHouseholderQr().solve(b);
        // roots of t^2 - p t - q
        cplx p = pq(0), q = pq(1);
        cplx disc = std::sqrt(p * p + 4.0 * q);
        cplx t1 = 0.5 * (p + disc), t2 = 0.5 * (p - disc);
        zeros.push_back(std::conj(t1));
        zeros.push_back(std::conj(t2));
    }

    for (const auto& z : zeros)
        if (!(std::abs(z) < 1.0 - 1e-6))
            throw DomainError("beurling_theta: fitted zero lies outside the unit disk");

    BlaschkeProduct theta(zeros);
    HCoeffVec expanded = theta.expand(L);
    for (int j = 0; j <= 5; ++j) {
        HCoeffVec tz = forward_shift(expanded, static_cast<std::size_t>(j));
        double res = std::max(std::abs(inner_product(tz, r.v).value),
                              std::abs(inner_product(tz, su).value));
        if (res > tol.residual_tol * std::max(1.0, norm(r.v) + norm(su)))
            throw DomainError("beurling_theta: fitted inner function failed re-orthogonality "
                              "validation (residual " + std::to_string(res) + ")");
    }
    return theta;
}

CheckReport check_dependent(const TruncOperator& T, const Tolerances& tol, bool enforce_branch) {
    const auto& r = rank_one_data(T, "check_dependent");
    if (enforce_branch) {
        Branch b = decide_branch(T, tol);
        if (b == Branch::independent) throw BranchError("wrong branch; use check_independent");
        if (b == Branch::isometry) throw BranchError("check_dependent: input is an isometry");
    }

    CheckReport rep;
    rep.oracle_residual = oracle::brute_residual(T);

    const int k = r.k;
    HCoeffVec su = backward_shift(r.u, static_cast<std::size_t>(k));
    double v_norm_sq = norm_squared(r.v).value.real();

    // v must be an eigenvector of the adjoint shift; the eigenvalue is
    // free and reported.
    HCoeffVec skv = backward_shift(r.v, static_cast<std::size_t>(k));
    cplx lambda = inner_product(skv, r.v).value / v_norm_sq;
    double eig_res = norm(subtract(skv, scale(r.v, lambda))) / std::max(1.0, norm(r.v));
    rep.condition_residuals["eigenvector"] = eig_res;
    rep.certificate.scalars["eigenvalue"] = lambda;

    WanderingBasis wb = kernel_wandering(T, tol);
    rep.condition_residuals["kernel_invariance"] = wb.invariance_gap;
    rep.certificate.generators = wb.generators;

    bool conds = true;
    if (wb.shift_invariant) {
        cplx su_v = inner_product(su, r.v).value;
        HCoeffVec zkv = forward_shift(r.v, static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < wb.generators.size(); ++i) {
            const auto& g = wb.generators[i];
            cplx low = 0.0;
            for (int n = 0; n < k; ++n)
                low += r.u.coeff(static_cast<std::size_t>(n)) * std::conj(g.coeff(static_cast<std::size_t>(n)));
            cplx val = (1.0 + su_v) * inner_product(zkv, g).value + v_norm_sq * low;
            rep.condition_residuals["condition_g" + std::to_string(i + 1)] = std::abs(val);
            conds = conds && std::abs(val) <= tol.residual_tol;
        }
        rep.certificate.scalars["pairing"] = su_v;
    } else {
        conds = false;
    }

    rep.verdict = wb.shift_invariant && eig_res <= tol.residual_tol && conds;
    rep.classification = rep.verdict ? Classification::dependent : Classification::not_quasinormal;
    return finalize_report(std::move(rep), tol);
}

CheckReport check_dependent_shift(const TruncOperator& T, const Tolerances& tol,
                                  bool enforce_branch) {
    const auto& r = rank_one_data(T, "check_dependent_shift");
    if (r.k != 1) throw DomainError("check_dependent_shift: requires shift multiplicity 1");
    if (enforce_branch) {
        Branch b = decide_branch(T, tol);
        if (b == Branch::independent) throw BranchError("wrong branch; use check_independent");
        if (b == Branch::isometry) throw BranchError("check_dependent_shift: input is an isometry");
    }

    CheckReport rep;
    rep.oracle_residual = oracle::brute_residual(T);

    // v must be a multiple of a kernel function; the parameter comes
    // from the leading coefficient ratio and is validated globally.
    double vnorm = norm(r.v);
    cplx v0 = r.v.coeff(0);
    bool fit_ok = std::abs(v0) > tol.rank_tol * std::max(1.0, vnorm);
    cplx alpha = 0.0;
    double shape = 1.0;
    if (fit_ok) {
        alpha = std::conj(r.v.coeff(1) / v0);
        if (std::abs(alpha) < 1.0 - 1e-6) {
            HCoeffVec model = scale(szego_kernel(alpha, static_cast<int>(std::max<std::size_t>(r.v.length(), 8))), v0);
            shape = norm(subtract(r.v, model)) / std::max(1.0, vnorm);
        } else {
            fit_ok = false;
        }
    }
    rep.condition_residuals["kernel_shape"] = fit_ok ? shape : 1.0;
    rep.certificate.scalars["alpha"] = alpha;

    double identity_res = 1.0;
    if (fit_ok && shape <= tol.residual_tol) {
        HCoeffVec su = backward_shift(r.u, 1);
        cplx va = evaluate(r.v, alpha).value;
        cplx sua = evaluate(su, alpha).value;
        double a2 = std::norm(alpha);
        cplx lhs = 1.0 + std::conj(va) * (1.0 - a2) * sua;
        cplx rhs = std::conj(alpha) * std::conj(va) * r.u.coeff(0);
        identity_res = std::abs(lhs - rhs);
        rep.certificate.scalars["v_at_alpha"] = va;
        rep.certificate.scalars["su_at_alpha"] = sua;
        rep.certificate.theta_zeros = {alpha};
    }
    rep.condition_residuals["identity"] = identity_res;

    rep.verdict = fit_ok && shape <= tol.residual_tol && identity_res <= tol.residual_tol;
    rep.classification = rep.verdict ? Classification::dependent : Classification::not_quasinormal;
    return finalize_report(std::move(rep), tol);
}

CheckReport check_s2_linear(const TruncOperator& T, const Tolerances& tol, bool enforce_branch) {
    const auto& r = rank_one_data(T, "check_s2_linear");
    if (r.k != 2) throw DomainError("check_s2_linear: requires shift multiplicity 2");
    for (std::size_t n = 2; n < r.v.length(); ++n)
        if (std::abs(r.v.coeff(n)) > tol.rank_tol)
            throw DomainError("check_s2_linear: v must be a polynomial of degree <= 1");
    if (enforce_branch) {
        Branch b = decide_branch(T, tol);
        if (b == Branch::independent) throw BranchError("wrong branch; use check_independent");
        if (b == Branch::isometry) throw BranchError("check_s2_linear: input is an isometry");
    }

    CheckReport rep;
    rep.oracle_residual = oracle::brute_residual(T);

    HCoeffVec su = backward_shift(r.u, 2);
    cplx pairing = inner_product(su, r.v).value;
    double c1 = std::abs(pairing + 1.0);

    cplx a = r.v.coeff(0), b = r.v.coeff(1);
    cplx mixed = r.u.coeff(1) * a - b * r.u.coeff(0);
    double c2 = std::abs(mixed);

    rep.condition_residuals["pairing_minus_one"] = c1;
    rep.condition_residuals["cross_term"] = c2;

    double vn = norm(r.v);
    rep.certificate.generators = {
        scale(HCoeffVec::polynomial({std::conj(b), -std::conj(a)}), 1.0 / vn),
        scale(HCoeffVec::polynomial({0.0, 0.0, a, b}), 1.0 / vn)};
    rep.certificate.scalars["pairing"] = pairing;

    rep.verdict = c1 <= tol.residual_tol && c2 <= tol.residual_tol;
    rep.classification = rep.verdict ? Classification::dependent : Classification::not_quasinormal;
    return finalize_report(std::move(rep), tol);
}

IndependentInvariants independent_invariants(const TruncOperator& T, const Tolerances& tol,
                                             bool enforce_branch) {
    const auto& r = rank_one_data(T, "independent_invariants");
    HCoeffVec su = backward_shift(r.u, static_cast<std::size_t>(r.k));
    double v2 = norm_squared(r.v).value.real();
    double su2 = norm_squared(su).value.real();
    cplx v_su = inner_product(r.v, su).value;
    if (enforce_branch) {
        double gap = v2 * su2 - std::norm(v_su);
        if (gap <= tol.rank_tol * std::max(1.0, v2 * su2))
            throw BranchError("independent_invariants: vectors are dependent; use the dependent branch");
    }

    HCoeffVec zkv = forward_shift(r.v, static_cast<std::size_t>(r.k));
    std::vector<cplx> low(static_cast<std::size_t>(r.k));
    for (int n = 0; n < r.k; ++n) low[static_cast<std::size_t>(n)] = r.u.coeff(static_cast<std::size_t>(n));
    HCoeffVec proj_u = HCoeffVec::polynomial(low);

    IndependentInvariants out;
    cplx su_v = inner_product(su, r.v).value;
    out.r0 = inner_product(zkv, r.v).value + inner_product(r.u, r.v).value * v2;
    out.r1 = inner_product(zkv, su).value + inner_product(r.u, su).value * v2;
    out.s0 = (1.0 + su_v) * inner_product(r.u, r.v).value + inner_product(proj_u, r.v).value;
    out.s1 = (1.0 + su_v) * inner_product(r.u, su).value + inner_product(proj_u, su).value;

    out.a_matrix(0, 0) = out.r0 * su2 - out.r1 * su_v;
    out.a_matrix(0, 1) = out.s0 * su2 - out.s1 * su_v;
    out.a_matrix(1, 0) = -out.r0 * v_su + out.r1 * v2;
    out.a_matrix(1, 1) = -out.s0 * v_su + out.s1 * v2;
    out.normality_residual = normality_residual_2x2(out.a_matrix);
    return out;
}

namespace {

// classification refinement for multiplicity one: inspect the fitted
// inner function's zero pattern
Classification refine_type(const TruncOperator& T, const Tolerances& tol, Certificate& cert) {
    try {
        BlaschkeProduct theta = beurling_theta(T, tol);
        cert.theta_zeros = theta.zeros;
        if (theta.degree() != 2) return Classification::independent_other;
        return std::abs(theta.zeros[0] - theta.zeros[1]) <= tol.group_tol
                   ? Classification::independent_type1
                   : Classification::independent_type2;
    } catch (const DomainError&) {
        return Classification::independent_other;
    }
}

} // namespace

CheckReport check_independent(const TruncOperator& T, const Tolerances& tol, bool enforce_branch) {
    const auto& r = rank_one_data(T, "check_independent");
    if (enforce_branch) {
        Branch b = decide_branch(T, tol);
        if (b != Branch::independent)
            throw BranchError("wrong branch; use the dependent checker");
    }

    CheckReport rep;
    rep.oracle_residual = oracle::brute_residual(T);

    HCoeffVec su = backward_shift(r.u, static_cast<std::size_t>(r.k));
    auto span = orthonormalize({r.v, su}, tol);

    double inv_v = residual_off_span(backward_shift(r.v, static_cast<std::size_t>(r.k)), span) /
                   std::max(1.0, norm(r.v));
    double inv_su = residual_off_span(backward_shift(su, static_cast<std::size_t>(r.k)), span) /
                    std::max(1.0, norm(su));
    rep.condition_residuals["adjoint_invariance_v"] = inv_v;
    rep.condition_residuals["adjoint_invariance_su"] = inv_su;

    IndependentInvariants ii = independent_invariants(T, tol, enforce_branch);
    rep.condition_residuals["a_normality"] = ii.normality_residual;
    rep.certificate.a_matrix = ii.a_matrix;
    rep.certificate.scalars["r0"] = ii.r0;
    rep.certificate.scalars["r1"] = ii.r1;
    rep.certificate.scalars["s0"] = ii.s0;
    rep.certificate.scalars["s1"] = ii.s1;

    WanderingBasis wb = kernel_wandering(T, tol);
    rep.condition_residuals["kernel_invariance"] = wb.invariance_gap;
    rep.certificate.generators = wb.generators;

    bool rels = wb.shift_invariant;
    if (wb.shift_invariant) {
        double v2 = norm_squared(r.v).value.real();
        cplx su_v = inner_product(su, r.v).value;
        HCoeffVec zkv = forward_shift(r.v, static_cast<std::size_t>(r.k));
        for (std::size_t i = 0; i < wb.generators.size(); ++i) {
            const auto& g = wb.generators[i];
            cplx rel1 = inner_product(zkv, g).value + v2 * inner_product(r.u, g).value;
            cplx low = 0.0;
            for (int n = 0; n < r.k; ++n)
                low += r.u.coeff(static_cast<std::size_t>(n)) * std::conj(g.coeff(static_cast<std::size_t>(n)));
            cplx rel2 = (1.0 + su_v) * inner_product(r.u, g).value + low;
            rep.condition_residuals["rel1_g" + std::to_string(i + 1)] = std::abs(rel1);
            rep.condition_residuals["rel2_g" + std::to_string(i + 1)] = std::abs(rel2);
            rels = rels && std::abs(rel1) <= tol.residual_tol && std::abs(rel2) <= tol.residual_tol;
        }
    }

    rep.verdict = inv_v <= tol.residual_tol && inv_su <= tol.residual_tol &&
                  ii.normality_residual <= tol.residual_tol && rels;

    if (!rep.verdict) {
        rep.classification = Classification::not_quasinormal;
    } else if (r.k == 1) {
        rep.classification = refine_type(T, tol, rep.certificate);
    } else {
        rep.classification = Classification::independent_other;
    }
    return finalize_report(std::move(rep), tol);
}

CheckReport check_type1(const TruncOperator& T, const Tolerances& tol, std::optional<cplx> alpha) {
    const auto& r = rank_one_data(T, "check_type1");
    if (r.k != 1) throw DomainError("check_type1: requires shift multiplicity 1");

    CheckReport rep;
    rep.oracle_residual = oracle::brute_residual(T);

    if (!alpha) {
        if (rep.oracle_residual > tol.residual_tol) {
            rep.condition_residuals["no_candidate"] = rep.oracle_residual;
            rep.classification = Classification::not_quasinormal;
            return finalize_report(std::move(rep), tol);
        }
        try {
            BlaschkeProduct theta = beurling_theta(T, tol);
            if (theta.degree() == 2 &&
                std::abs(theta.zeros[0] - theta.zeros[1]) <= tol.group_tol) {
                alpha = 0.5 * (theta.zeros[0] + theta.zeros[1]);
            } else {
                rep.condition_residuals["no_double_zero_theta"] =
                    theta.degree() == 2 ? std::abs(theta.zeros[0] - theta.zeros[1]) : 1.0;
                rep.classification = Classification::not_quasinormal;
                return finalize_report(std::move(rep), tol);
            }
        } catch (const DomainError&) {
            rep.condition_residuals["no_double_zero_theta"] = 1.0;
            rep.classification = Classification::not_quasinormal;
            return finalize_report(std::move(rep), tol);
        }
    }

    const cplx a = *alpha;
    const int L = T.trusted_columns(2);
    HCoeffVec su = backward_shift(r.u, 1);

    HCoeffVec ka = szego_kernel(a, L);
    HCoeffVec bka = blaschke_kernel_product(a, 1, L);
    auto span = orthonormalize({ka, bka}, tol);
    double c1 = std::max(residual_off_span(r.v, span) / std::max(1.0, norm(r.v)),
                         residual_off_span(su, span) / std::max(1.0, norm(su)));

    cplx va = evaluate(r.v, a).value;
    cplx bva = inner_product(r.v, bka).value;  // adjoint pairing for (B* v)(alpha)
    double c2 = std::abs(va + a * bva);

    HCoeffVec b2 = BlaschkeProduct({a, a}).expand(L);
    cplx u_b2 = inner_product(r.u, b2).value;
    double c3 = std::abs(std::conj(bva) * u_b2 + 1.0);

    cplx sua = evaluate(su, a).value;
    cplx u0 = r.u.coeff(0);
    cplx R = (1.0 - std::norm(a)) * sua - std::conj(a) * u0;
    Eigen::Matrix2cd M;
    M(0, 0) = std::conj(va) * u0 + a * (1.0 + std::conj(va) * R);
    M(0, 1) = std::conj(bva) * u0 + a * std::conj(bva) * R;
    M(1, 0) = 1.0 + std::conj(va) * R;
    M(1, 1) = std::conj(bva) * R;
    double c4 = normality_residual_2x2(M);

    rep.condition_residuals["span"] = c1;
    rep.condition_residuals["value_identity"] = c2;
    rep.condition_residuals["pairing_identity"] = c3;
    rep.condition_residuals["matrix_normality"] = c4;
    rep.certificate.theta_zeros = {a, a};
    rep.certificate.a_matrix = M;
    rep.certificate.scalars["R"] = R;
    rep.certificate.scalars["v_at_alpha"] = va;
    rep.certificate.scalars["bstar_v_at_alpha"] = bva;
    rep.certificate.scalars["u0"] = u0;

    rep.verdict = c1 <= tol.residual_tol && c2 <= tol.residual_tol && c3 <= tol.residual_tol &&
                  c4 <= tol.residual_tol;
    rep.classification =
        rep.verdict ? Classification::independent_type1 : Classification::not_quasinormal;
    return finalize_report(std::move(rep), tol);
}

CheckReport check_type2(const TruncOperator& T, const Tolerances& tol,
                        std::optional<std::pair<cplx, cplx>> zeros) {
    const auto& r = rank_one_data(T, "check_type2");
    if (r.k != 1) throw DomainError("check_type2: requires shift multiplicity 1");

    CheckReport rep;
    rep.oracle_residual = oracle::brute_residual(T);

    if (!zeros) {
        if (rep.oracle_residual > tol.residual_tol) {
            rep.condition_residuals["no_candidate"] = rep.oracle_residual;
            rep.classification = Classification::not_quasinormal;
            return finalize_report(std::move(rep), tol);
        }
        try {
            BlaschkeProduct theta = beurling_theta(T, tol);
            if (theta.degree() != 2) {
                rep.condition_residuals["no_degree_two_theta"] = 1.0;
                rep.classification = Classification::not_quasinormal;
                return finalize_report(std::move(rep), tol);
            }
            zeros = std::make_pair(theta.zeros[0], theta.zeros[1]);
        } catch (const DomainError&) {
            rep.condition_residuals["no_degree_two_theta"] = 1.0;
            rep.classification = Classification::not_quasinormal;
            return finalize_report(std::move(rep), tol);
        }
    }

    cplx a = zeros->first, b = zeros->second;
    if (std::abs(a - b) <= tol.group_tol)
        throw BranchError("check_type2: zeros coincide; use check_type1");

    const int L = T.trusted_columns(2);
    HCoeffVec su = backward_shift(r.u, 1);

    HCoeffVec ka = szego_kernel(a, L), kb = szego_kernel(b, L);
    auto span = orthonormalize({ka, kb}, tol);
    double c1 = std::max(residual_off_span(r.v, span) / std::max(1.0, norm(r.v)),
                         residual_off_span(su, span) / std::max(1.0, norm(su)));

    HCoeffVec bb = BlaschkeProduct({a, b}).expand(L);
    cplx Q = inner_product(r.u, bb).value;
    cplx va = evaluate(r.v, a).value, vb = evaluate(r.v, b).value;
    double c2 = std::abs(std::conj(va) * Q - std::conj(b));
    double c3 = std::abs(std::conj(vb) * Q - std::conj(a));

    // expansion scalars of S*u against the two kernels
    cplx denom = std::conj(a - b);
    cplx s0 = (su.coeff(1) - std::conj(b) * su.coeff(0)) / denom;
    cplx s1 = -(su.coeff(1) - std::conj(a) * su.coeff(0)) / denom;
    cplx u0 = r.u.coeff(0);

    Eigen::Matrix2cd M;
    if (std::abs(a) > tol.group_tol) {
        cplx ac = std::conj(a);
        M(0, 0) = (1.0 + std::conj(va) * s0) / ac;
        M(0, 1) = std::conj(vb) * s0 / ac;
        M(1, 0) = std::conj(va) * u0 - (1.0 + std::conj(va) * s0) / ac;
        M(1, 1) = std::conj(vb) * u0 - std::conj(vb) * s0 / ac;
    } else {
        cplx bc = std::conj(b);
        M(0, 0) = std::conj(va) * u0 - std::conj(va) * s1 / bc;
        M(0, 1) = std::conj(vb) * u0 - (1.0 + s1 * std::conj(vb)) / bc;
        M(1, 0) = std::conj(va) * s1 / bc;
        M(1, 1) = (1.0 + std::conj(vb) * s1) / bc;
    }
    double c4 = normality_residual_2x2(M);

    rep.condition_residuals["span"] = c1;
    rep.condition_residuals["value_identity_alpha"] = c2;
    rep.condition_residuals["value_identity_beta"] = c3;
    rep.condition_residuals["matrix_normality"] = c4;
    rep.certificate.theta_zeros = {a, b};
    rep.certificate.a_matrix = M;
    rep.certificate.scalars["s0"] = s0;
    rep.certificate.scalars["s1"] = s1;
    rep.certificate.scalars["v_at_alpha"] = va;
    rep.certificate.scalars["v_at_beta"] = vb;

    rep.verdict = c1 <= tol.residual_tol && c2 <= tol.residual_tol && c3 <= tol.residual_tol &&
                  c4 <= tol.residual_tol;
    rep.classification =
        rep.verdict ? Classification::independent_type2 : Classification::not_quasinormal;
    return finalize_report(std::move(rep), tol);
}

CheckReport check_rank_one(const TruncOperator& T, const Tolerances& tol) {
    rank_one_data(T, "check_rank_one");
    Branch branch = decide_branch(T, tol);
    double angle = branch_angle(T);

    CheckReport rep;
    switch (branch) {
        case Branch::isometry: {
            rep.verdict = true;
            rep.classification = Classification::isometry;
            rep.condition_residuals["defect_norm"] = defect_norm(T);
            rep.oracle_residual = oracle::brute_residual(T);
            break;
        }
        case Branch::dependent: {
            rep = check_dependent(T, tol);
            if (T.rank_one->k == 1) {
                CheckReport corollary = check_dependent_shift(T, tol);
                for (const auto& [k, v] : corollary.condition_residuals)
                    rep.condition_residuals["shift_" + k] = v;
                if (corollary.verdict != rep.verdict)
                    throw ConsistencyAlarm(
                        "check_rank_one: dependent checker and its multiplicity-one corollary disagree");
                if (corollary.verdict && !corollary.certificate.theta_zeros.empty())
                    rep.certificate.theta_zeros = corollary.certificate.theta_zeros;
            }
            break;
        }
        case Branch::independent: {
            rep = check_independent(T, tol);
            break;
        }
    }

    // borderline dependence: both branch verdicts must match the oracle
    if (branch != Branch::isometry && angle >= 0.1 * kBranchAngleThreshold &&
        angle <= 10.0 * kBranchAngleThreshold) {
        bool oracle_ok = rep.oracle_residual <= tol.residual_tol;
        CheckReport dep = check_dependent(T, tol, false);
        CheckReport ind = check_independent(T, tol, false);
        if (dep.verdict != oracle_ok || ind.verdict != oracle_ok)
            throw ConsistencyAlarm("check_rank_one: borderline dependence, branch verdicts disagree "
                                   "with the oracle");
    }
    return rep;
}

GeneratedInstance generate_dependent(cplx alpha, cplx u0, cplx c_scale, int N,
                                     const Tolerances& tol) {
    if (!(std::abs(alpha) < 1.0)) throw DomainError("generate_dependent: alpha must be in the disk");
    if (std::abs(c_scale) < 1e-12)
        throw DomainError("generate_dependent: c_scale = 0 degenerates the dependence");

    cplx R = c_scale - std::conj(alpha) * u0;
    if (std::abs(R) < 1e-12 * (std::abs(c_scale) + std::abs(u0) + 1.0))
        throw DomainError("generate_dependent: degenerate, no dependent quasinormal v exists for this u");

    HCoeffVec kernel = szego_kernel(alpha, N);
    HCoeffVec u = add(HCoeffVec::polynomial({u0}), forward_shift(scale(kernel, c_scale), 1));
    cplx t = -(1.0 - std::norm(alpha)) / std::conj(R);
    HCoeffVec v = scale(kernel, t);

    GeneratedInstance out{u, v, perturbed_shift(1, u, v, N, tol)};
    double res = quasinormal_residual(out.op);
    if (res > tol.residual_tol)
        throw ConsistencyAlarm("generate_dependent: constructed instance has residual " +
                               std::to_string(res));
    return out;
}

GeneratedInstance generate_isometry(int k, double t, const HCoeffVec& u, int N,
                                    const Tolerances& tol) {
    cplx phase = std::polar(1.0, t);
    if (std::abs(phase - 1.0) < 1e-9)
        throw DomainError("generate_isometry: phase must differ from 1");
    double un = norm(u);
    if (un == 0.0) throw DomainError("generate_isometry: u must be nonzero");
    HCoeffVec unit_u = scale(u, 1.0 / un);
    HCoeffVec su = backward_shift(unit_u, static_cast<std::size_t>(k));
    if (su.is_zero(tol.rank_tol))
        throw DomainError("generate_isometry: S_k* u vanishes; no isometric perturbation exists");

    HCoeffVec v = scale(su, phase - 1.0);
    GeneratedInstance out{unit_u, v, perturbed_shift(k, unit_u, v, N, tol)};
    if (!is_isometry(out.op, tol.residual_tol))
        throw ConsistencyAlarm("generate_isometry: constructed operator is not an isometry");
    return out;
}

namespace {

cplx unpack(const Eigen::VectorXd& x, int i) { return cplx(x(2 * i), x(2 * i + 1)); }

GenerationOutcome solve_type(cplx alpha, std::optional<cplx> beta, std::uint64_t seed, int N,
                             const Tolerances& tol) {
    const bool type1 = !beta.has_value();
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> U(-1.5, 1.5);

    const int L = std::max(N / 2, 32);
    HCoeffVec ka = szego_kernel(alpha, L);
    HCoeffVec bka = type1 ? blaschke_kernel_product(alpha, 1, L) : szego_kernel(*beta, L);

    for (int start = 0; start < 40; ++start) {
        Eigen::VectorXd x0(6);
        for (int i = 0; i < 6; ++i) x0(i) = U(rng);

        std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual_fn;
        if (type1) {
            // unknowns: c1, d0, u0; c0 and d1 are eliminated by the two
            // scalar identities, leaving matrix normality.
            residual_fn = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                cplx c1 = unpack(x, 0), d0 = unpack(x, 1), u0 = unpack(x, 2);
                double a2 = std::norm(alpha);
                if (std::abs(c1) < 1e-8) c1 = 1e-8;
                cplx d1 = -(1.0 - a2) / std::conj(c1) - std::conj(alpha) * std::conj(alpha) * u0 +
                          std::conj(alpha) * d0;
                cplx V0 = -std::conj(alpha * c1) / (1.0 - a2);  // conj(v(alpha)) with c0 = -alpha c1
                cplx V1 = std::conj(c1) / (1.0 - a2);
                cplx R = d0 - std::conj(alpha) * u0;
                cplx p = V0 * u0 + alpha * (1.0 + V0 * R);
                cplx q = V1 * u0 + alpha * V1 * R;
                cplx rr = 1.0 + V0 * R;
                cplx s = V1 * R;
                (void)d1;
                Eigen::VectorXd f(3);
                f(0) = std::norm(q) - std::norm(rr);
                cplx cross = std::conj(p) * q + std::conj(rr) * s - (p * std::conj(rr) + q * std::conj(s));
                f(1) = cross.real();
                f(2) = cross.imag();
                return f;
            };
        } else {
            residual_fn = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                cplx s0 = unpack(x, 0), s1 = unpack(x, 1), u0 = unpack(x, 2);
                cplx b = *beta;
                cplx Q = std::conj(alpha * b) * u0 - std::conj(b) * s0 - std::conj(alpha) * s1;
                if (std::abs(Q) < 1e-8) Q = 1e-8;
                cplx Va = std::conj(b) / Q;  // conj(v(alpha))
                cplx Vb = std::conj(alpha) / Q;
                Eigen::Matrix2cd M;
                if (std::abs(alpha) > tol.group_tol) {
                    cplx ac = std::conj(alpha);
                    M(0, 0) = (1.0 + Va * s0) / ac;
                    M(0, 1) = Vb * s0 / ac;
                    M(1, 0) = Va * u0 - (1.0 + Va * s0) / ac;
                    M(1, 1) = Vb * u0 - Vb * s0 / ac;
                } else {
                    cplx bc = std::conj(b);
                    M(0, 0) = Va * u0 - Va * s1 / bc;
                    M(0, 1) = Vb * u0 - (1.0 + s1 * Vb) / bc;
                    M(1, 0) = Va * s1 / bc;
                    M(1, 1) = (1.0 + Vb * s1) / bc;
                }
                Eigen::Matrix2cd comm = M.adjoint() * M - M * M.adjoint();
                Eigen::VectorXd f(3);
                f(0) = comm(0, 0).real();
                f(1) = comm(0, 1).real();
                f(2) = comm(0, 1).imag();
                return f;
            };
        }

        LMResult lm = levenberg_marquardt(residual_fn, x0, 300, 1e-13);
        if (!lm.converged) continue;

        HCoeffVec u, v;
        if (type1) {
            cplx c1 = unpack(lm.x, 0), d0 = unpack(lm.x, 1), u0 = unpack(lm.x, 2);
            if (std::abs(c1) < 1e-4) continue;
            double a2 = std::norm(alpha);
            cplx c0 = -alpha * c1;
            cplx d1 = -(1.0 - a2) / std::conj(c1) - std::conj(alpha) * std::conj(alpha) * u0 +
                      std::conj(alpha) * d0;
            v = add(scale(ka, c0), scale(bka, c1));
            HCoeffVec su = add(scale(ka, d0), scale(bka, d1));
            u = add(HCoeffVec::polynomial({u0}), forward_shift(su, 1));
            // independence margin: det of the coefficient pairs
            if (std::abs(c0 * d1 - c1 * d0) <
                1e-3 * (std::abs(c0) + std::abs(c1)) * (std::abs(d0) + std::abs(d1)))
                continue;
        } else {
            cplx s0 = unpack(lm.x, 0), s1 = unpack(lm.x, 1), u0 = unpack(lm.x, 2);
            cplx b = *beta;
            cplx Q = std::conj(alpha * b) * u0 - std::conj(b) * s0 - std::conj(alpha) * s1;
            if (std::abs(Q) < 1e-4) continue;
            cplx va = std::conj(std::conj(b) / Q), vb = std::conj(std::conj(alpha) / Q);
            // solve for the kernel coefficients of v from its two values
            Eigen::Matrix2cd G;
            G(0, 0) = 1.0 / (1.0 - std::norm(alpha));
            G(0, 1) = 1.0 / (1.0 - std::conj(b) * alpha);
            G(1, 0) = 1.0 / (1.0 - std::conj(alpha) * b);
            G(1, 1) = 1.0 / (1.0 - std::norm(b));
            Eigen::Vector2cd rhs(va, vb);
            Eigen::Vector2cd tvec = G.fullPivLu().solve(rhs);
            v = add(scale(ka, tvec(0)), scale(bka, tvec(1)));
            HCoeffVec su = add(scale(ka, s0), scale(bka, s1));
            u = add(HCoeffVec::polynomial({u0}), forward_shift(su, 1));
            if (std::abs(tvec(0) * s1 - tvec(1) * s0) <
                1e-3 * (std::abs(tvec(0)) + std::abs(tvec(1))) * (std::abs(s0) + std::abs(s1)))
                continue;
        }

        if (norm(v) < 0.05 || norm(v) > 50.0 || norm(u) < 0.05 || norm(u) > 50.0) continue;

        // gauge balance: u <- cu, v <- v/conj(c) leaves u (x) v intact
        double g = std::sqrt(norm(v) / norm(u));
        u = scale(u, g);
        v = scale(v, 1.0 / g);

        TruncOperator T;
        try {
            T = perturbed_shift(1, u, v, N, tol);
        } catch (const TruncationError&) {
            continue;
        }

        CheckReport rep;
        try {
            rep = type1 ? check_type1(T, tol, alpha)
                        : check_type2(T, tol, std::make_pair(alpha, *beta));
        } catch (const ConsistencyAlarm&) {
            continue;
        }
        if (!rep.verdict || rep.oracle_residual > tol.residual_tol) continue;

        GenerationOutcome out;
        out.instance = GeneratedInstance{u, v, T};
        return out;
    }
    return GenerationOutcome{std::nullopt, "no solution found from this seed"};
}

} // namespace

GenerationOutcome generate_type1(cplx alpha, std::uint64_t seed, int N, const Tolerances& tol) {
    if (!(std::abs(alpha) < 1.0)) throw DomainError("generate_type1: alpha must be in the disk");
    return solve_type(alpha, std::nullopt, seed, N, tol);
}

GenerationOutcome generate_type2(cplx alpha, cplx beta, std::uint64_t seed, int N,
                                 const Tolerances& tol) {
    if (!(std::abs(alpha) < 1.0) || !(std::abs(beta) < 1.0))
        throw DomainError("generate_type2: parameters must be in the disk");
    if (std::abs(alpha - beta) <= 1e-6)
        throw DomainError("generate_type2: parameters must be distinct");
    return solve_type(alpha, beta, seed, N, tol);
}

} // namespace qnops
