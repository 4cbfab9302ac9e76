#include "qnops/cnu.hpp"

#include <algorithm>
#include <cmath>

#include "qnops/errors.hpp"

namespace qnops {

namespace {

// Orthonormal basis (columns) of the numerical range of a Hermitian
// matrix, eigenvalues above cutoff in magnitude.
Eigen::MatrixXcd hermitian_range(const Eigen::MatrixXcd& H, double cutoff) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    std::vector<int> idx;
    for (int i = 0; i < H.rows(); ++i)
        if (std::abs(es.eigenvalues()(i)) > cutoff) idx.push_back(i);
    Eigen::MatrixXcd out(H.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(idx[j]);
    return out;
}

double spectral_norm_hermitian(const Eigen::MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff()));
}

} // namespace

CnuFiniteRank split_cnu(const TruncOperator& T, const Tolerances& tol) {
    T.require_window(2, "split_cnu");
    const int N = T.size();
    const int w = T.trusted_columns(2);

    Eigen::MatrixXcd defect_t =
        (Eigen::MatrixXcd::Identity(N, N) - T.mat.adjoint() * T.mat).topLeftCorner(w, w);
    Eigen::MatrixXcd defect_ts =
        (Eigen::MatrixXcd::Identity(N, N) - T.mat * T.mat.adjoint()).topLeftCorner(w, w);

    // contraction check on the trusted window
    double norm_sq = spectral_norm_hermitian(Eigen::MatrixXcd(
        (T.mat.adjoint() * T.mat).topLeftCorner(w, w)));
    if (norm_sq > (1.0 + tol.rank_tol) * (1.0 + tol.rank_tol))
        throw DomainError("split_cnu: operator is not a contraction (||T||^2 = " +
                          std::to_string(norm_sq) + ")");

    Eigen::MatrixXcd range_t = hermitian_range(defect_t, tol.rank_tol);
    Eigen::MatrixXcd range_ts = hermitian_range(defect_ts, tol.rank_tol);
    const int n = static_cast<int>(range_t.cols());
    const int n_star = static_cast<int>(range_ts.cols());

    // containment of the defect of T in the defect of T*
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXcd b = range_t.col(j);
        double leak = (b - range_ts * (range_ts.adjoint() * b)).norm();
        if (leak > 10 * tol.rank_tol)
            throw DomainError("split_cnu: defect containment fails (defect vector " +
                              std::to_string(j) + " leaks " + std::to_string(leak) + ")");
    }
    const int k = n_star - n;
    if (k <= 0)
        throw DomainError("split_cnu: defect index difference is zero; no shift part exists");

    CnuFiniteRank out;
    out.n = n;
    out.k = k;
    out.window = w;
    out.r_max = n + k + 2;

    // Kernel side of the defect inside the window; T acts isometrically
    // there, and its wandering subspace seeds the adapted basis.
    Eigen::MatrixXcd kernel = hermitian_range(
        Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(w, w) - range_t * range_t.adjoint()),
        0.5);
    Eigen::MatrixXcd kernel_pad = Eigen::MatrixXcd::Zero(N, kernel.cols());
    kernel_pad.topRows(w) = kernel;

    Eigen::MatrixXcd shifted = T.mat * kernel_pad;
    // wandering = kernel minus its image under T
    Eigen::MatrixXcd wander = kernel_pad - shifted * (shifted.adjoint() * kernel_pad);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(wander, Eigen::ComputeThinU);
    std::vector<int> seed_idx;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        double s = svd.singularValues()(i);
        if (s > 0.5) seed_idx.push_back(i);
        else if (s > std::sqrt(tol.rank_tol))
            throw ConsistencyAlarm("split_cnu: ill-separated wandering singular value " +
                                   std::to_string(s));
    }
    if (static_cast<int>(seed_idx.size()) != k)
        throw DomainError("split_cnu: wandering dimension " + std::to_string(seed_idx.size()) +
                          " does not match the defect index difference " + std::to_string(k));

    const int generated = k * out.r_max;
    const int total = n + k + generated;
    if (w + out.r_max * std::max(T.step, 1) > N || total > w)
        throw TruncationError("split_cnu: increase truncation to materialize the adapted basis",
                              N + out.r_max * std::max(T.step, 1));

    Eigen::MatrixXcd basis = Eigen::MatrixXcd::Zero(N, total);
    basis.topLeftCorner(w, n) = range_t;
    for (int j = 0; j < k; ++j) basis.col(n + j) = svd.matrixU().col(seed_idx[static_cast<std::size_t>(j)]);

    // Generate the rest by iterating T; off the defect space T is the
    // abstract shift, so each new column must stay orthonormal.
    for (int m = n; m + k < total; ++m) {
        Eigen::VectorXcd next = T.mat * basis.col(m);
        for (int j = 0; j < m + k; ++j) {
            cplx c = basis.col(j).adjoint() * next;
            if (std::abs(c) > std::sqrt(tol.rank_tol))
                throw DomainError("split_cnu: generated basis loses orthogonality; "
                                  "input is not shift-plus-finite-rank against any basis at this window");
            next -= c * basis.col(j);
        }
        double nn = next.norm();
        if (std::abs(nn - 1.0) > std::sqrt(tol.rank_tol))
            throw DomainError("split_cnu: generated basis vector has norm " + std::to_string(nn));
        basis.col(m + k) = next / nn;
    }
    out.basis = basis;

    // F1 = T restricted to the defect space, zero elsewhere.
    Eigen::MatrixXcd proj_n = basis.leftCols(n) * basis.leftCols(n).adjoint();
    out.f1.mat = T.mat * proj_n;
    out.f1.exact_window = w;
    out.f1.step = T.step;

    // F = F1 - S_k P_n with S_k the abstract shift of the adapted basis.
    out.f.mat = out.f1.mat;
    for (int i = 0; i < n; ++i)
        out.f.mat -= basis.col(i + k) * basis.col(i).adjoint();
    out.f.exact_window = w;
    out.f.step = T.step;

    // F_r = F1^r + sum_j T^j (I - P_n) F1^{r-j}; every shift application
    // acts on vectors orthogonal to the defect space, where T equals it.
    std::vector<Eigen::MatrixXcd> f1_pow(static_cast<std::size_t>(out.r_max) + 1);
    f1_pow[0] = Eigen::MatrixXcd::Identity(N, N);
    for (int r = 1; r <= out.r_max; ++r) f1_pow[static_cast<std::size_t>(r)] = out.f1.mat * f1_pow[static_cast<std::size_t>(r - 1)];
    for (int r = 1; r <= out.r_max; ++r) {
        Eigen::MatrixXcd fr = f1_pow[static_cast<std::size_t>(r)];
        for (int j = 1; j <= r - 1; ++j) {
            Eigen::MatrixXcd term = f1_pow[static_cast<std::size_t>(r - j)];
            term -= proj_n * term;  // (I - P_n)
            for (int a = 0; a < j; ++a) term = T.mat * term;
            fr += term;
        }
        TruncOperator frop;
        frop.mat = std::move(fr);
        frop.exact_window = w;
        frop.step = T.step;
        out.fr_cache.push_back(std::move(frop));
    }
    return out;
}

namespace {

// Columns of M restricted to the span of the leading `count` adapted
// basis columns, plus the worst leakage outside that span.
struct SubspaceCoords {
    Eigen::MatrixXcd coords;
    double leakage = 0.0;
};

SubspaceCoords project_columns(const Eigen::MatrixXcd& cols, const Eigen::MatrixXcd& basis,
                               int count) {
    SubspaceCoords out;
    Eigen::MatrixXcd B = basis.leftCols(count);
    out.coords = B.adjoint() * cols;
    Eigen::MatrixXcd residual = cols - B * out.coords;
    out.leakage = cols.cols() > 0 ? residual.colwise().norm().maxCoeff() : 0.0;
    return out;
}

double sigma_max(const Eigen::MatrixXcd& m) {
    if (m.cols() == 0 || m.rows() == 0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

} // namespace

PropCharReport check_prop_char(const CnuFiniteRank& c, const Tolerances& tol) {
    PropCharReport rep;
    const int n = c.n, k = c.k;
    const Eigen::MatrixXcd& basis = c.basis;

    if (n == 0) {
        // vacuous: no defect, every condition holds trivially
        rep.rank_condition = rep.support_condition = rep.support_condition_sharp = true;
        rep.lambda_condition = rep.power_condition = rep.strictness_probe = true;
        return rep;
    }

    // (1) rank(P_n - F1*F1) = n on the defect block
    Eigen::MatrixXcd f1_cols = c.f1.mat * basis.leftCols(n);
    Eigen::MatrixXcd gram = f1_cols.adjoint() * f1_cols;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(n, n) - gram), Eigen::EigenvaluesOnly);
    rep.rank_gap = es.eigenvalues().cwiseAbs().minCoeff();
    rep.rank_condition = rep.rank_gap > tol.rank_tol;

    // (2) support of F1 on both sides
    rep.support_right = (c.f1.mat - c.f1.mat * basis.leftCols(n) * basis.leftCols(n).adjoint())
                            .colwise()
                            .norm()
                            .maxCoeff();
    auto nk = project_columns(f1_cols, basis, n + k);
    auto nn = project_columns(f1_cols, basis, n);
    rep.support_left_nk = nk.leakage;
    rep.support_left_n = nn.leakage;
    rep.support_condition = rep.support_right <= tol.residual_tol &&
                            rep.support_left_nk <= tol.residual_tol;
    rep.support_condition_sharp = rep.support_right <= tol.residual_tol &&
                                  rep.support_left_n <= tol.residual_tol;

    // (3) exists lambda >= 0 with
    //     lambda (F1 F1* - P_{n+k}) <= F1*F1 - P_n.
    // Work inside the span of the first n+k basis columns plus whatever
    // F1's range leaks into; outside it both sides vanish.
    {
        const int base = std::min<int>(n + k + 4, static_cast<int>(basis.cols()));
        Eigen::MatrixXcd B = basis.leftCols(base);
        Eigen::MatrixXcd C = B.adjoint() * f1_cols;              // F1 columns in local coords
        Eigen::MatrixXcd Pn = Eigen::MatrixXcd::Zero(base, base);
        Pn.topLeftCorner(n, n).setIdentity();
        Eigen::MatrixXcd Pnk = Eigen::MatrixXcd::Zero(base, base);
        Pnk.topLeftCorner(n + k, n + k).setIdentity();
        Eigen::MatrixXcd lhs_fixed = C * C.adjoint() - Pnk;       // multiplies lambda
        // F1*F1 in local coords equals the Gram of the F1 columns on
        // the defect block
        Eigen::MatrixXcd f1sf1 = Eigen::MatrixXcd::Zero(base, base);
        f1sf1.topLeftCorner(n, n) = gram;
        Eigen::MatrixXcd target = f1sf1 - Pn;

        auto min_eig = [&](double lam) {
            Eigen::MatrixXcd H = target - lam * lhs_fixed;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s(H, Eigen::EigenvaluesOnly);
            return s.eigenvalues().minCoeff();
        };
        // min_eig is concave in lambda; ternary search for its maximum
        double lo = 0.0, hi = 1e6;
        for (int it = 0; it < 200; ++it) {
            double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (min_eig(m1) < min_eig(m2)) lo = m1;
            else hi = m2;
        }
        rep.lambda_witness = 0.5 * (lo + hi);
        double best = min_eig(rep.lambda_witness);
        double at_zero = min_eig(0.0);
        if (at_zero > best) {
            best = at_zero;
            rep.lambda_witness = 0.0;
        }
        rep.lambda_best_min_eig = best;
        rep.lambda_condition = best >= -tol.residual_tol;
    }

    // (4) ||F_r x|| <= ||P_n x|| and ||F_r* x|| <= ||P_{n+kr} x||
    rep.power_condition = true;
    rep.strictness_probe = true;
    double worst = -1.0;
    for (int r = 1; r <= c.r_max; ++r) {
        const Eigen::MatrixXcd& fr = c.fr_cache[static_cast<std::size_t>(r - 1)].mat;
        Eigen::MatrixXcd cols = fr * basis.leftCols(n);
        double s_fwd = sigma_max(cols);
        worst = std::max(worst, s_fwd - 1.0);

        int reach = std::min<int>(n + k * r, static_cast<int>(basis.cols()));
        auto proj = project_columns(cols, basis, reach);
        double s_adj = sigma_max(proj.coords);
        worst = std::max(worst, s_adj - 1.0);
        if (s_fwd > 1.0 + tol.rank_tol || s_adj > 1.0 + tol.rank_tol ||
            proj.leakage > tol.residual_tol)
            rep.power_condition = false;

        // strictness probe: directions in the defect space meeting the
        // forward equality must not meet the adjoint equality too
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(cols, Eigen::ComputeThinV);
        std::vector<int> flat;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (std::abs(svd.singularValues()(i) - 1.0) <= tol.group_tol) flat.push_back(i);
        if (!flat.empty()) {
            Eigen::MatrixXcd dirs(basis.rows(), static_cast<Eigen::Index>(flat.size()));
            for (std::size_t j = 0; j < flat.size(); ++j)
                dirs.col(static_cast<Eigen::Index>(j)) =
                    basis.leftCols(n) * svd.matrixV().col(flat[j]);
            double adj_on_flat = sigma_max(Eigen::MatrixXcd(fr.adjoint() * dirs));
            if (adj_on_flat >= 1.0 - tol.group_tol) rep.strictness_probe = false;
        }
    }
    rep.worst_power_gap = worst;
    return rep;
}

CnuQuasinormalReport check_cnu_quasinormal(const CnuFiniteRank& c, const TruncOperator& T,
                                           const Tolerances& tol) {
    CnuQuasinormalReport rep;
    rep.oracle_residual = quasinormal_residual(T);
    const int n = c.n;
    const Eigen::MatrixXcd& basis = c.basis;

    if (n == 0) {
        rep.rank_condition = rep.support_condition = rep.normal_condition = true;
        rep.strict_power_condition = true;
        rep.verdict = true;
        return rep;
    }

    Eigen::MatrixXcd f1_cols = c.f1.mat * basis.leftCols(n);
    Eigen::MatrixXcd gram = f1_cols.adjoint() * f1_cols;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(n, n) - gram), Eigen::EigenvaluesOnly);
    rep.rank_condition = es.eigenvalues().cwiseAbs().minCoeff() > tol.rank_tol;

    double right = (c.f1.mat - c.f1.mat * basis.leftCols(n) * basis.leftCols(n).adjoint())
                       .colwise()
                       .norm()
                       .maxCoeff();
    auto nn = project_columns(f1_cols, basis, n);
    rep.support_residual = std::max(right, nn.leakage);
    rep.support_condition = rep.support_residual <= tol.residual_tol;

    // normality of the defect block: compare F1*F1 and F1 F1* inside
    // the defect space (where both live once the support condition
    // holds; leakage is already charged above)
    Eigen::MatrixXcd local = nn.coords;  // n x n matrix of F1 on the defect block
    Eigen::MatrixXcd comm = local.adjoint() * local - local * local.adjoint();
    rep.normality_residual = spectral_norm_hermitian(comm);
    rep.normal_condition = rep.normality_residual <= tol.residual_tol;

    rep.strict_power_condition = true;
    double worst = 0.0;
    Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(n, n);
    for (int r = 1; r <= c.r_max; ++r) {
        pw = local * pw;
        worst = std::max(worst, sigma_max(pw));
        if (sigma_max(pw) >= 1.0 - tol.rank_tol) rep.strict_power_condition = false;
    }
    rep.max_power_sigma = worst;

    rep.verdict = rep.rank_condition && rep.support_condition && rep.normal_condition &&
                  rep.strict_power_condition;
    if (rep.verdict && rep.oracle_residual > tol.residual_tol)
        throw ConsistencyAlarm("check_cnu_quasinormal: verdict true but oracle residual " +
                               std::to_string(rep.oracle_residual));
    return rep;
}

TruncOperator dim1_matrix(const std::vector<cplx>& alphas, int N, const Tolerances& tol) {
    if (alphas.empty()) throw DomainError("dim1_matrix: need at least one scalar");
    const int k = static_cast<int>(alphas.size()) - 1;
    if (k < 1) throw DomainError("dim1_matrix: need k >= 1 (len(alphas) >= 2)");
    double mass = 0.0;
    for (const auto& a : alphas) mass += std::norm(a);
    if (!(mass < 1.0)) throw DomainError("dim1_matrix: sum |alpha_i|^2 must be < 1");
    if (N < 4 * k + 8) throw TruncationError("dim1_matrix: truncation too small", 4 * k + 8);

    TruncOperator T;
    T.mat = Eigen::MatrixXcd::Zero(N, N);
    for (std::size_t i = 0; i < alphas.size(); ++i) T.mat(static_cast<Eigen::Index>(i), 0) = alphas[i];
    for (int m = 1; m + k < N; ++m) T.mat(m + k, m) = 1.0;
    T.exact_window = N - k;
    T.step = k;

    // T = S_k + (sum alpha_i z^i - z^k) (x) 1, which the rank-one
    // machinery can consume directly.
    std::vector<cplx> uc(alphas.begin(), alphas.end());
    uc[static_cast<std::size_t>(k)] -= 1.0;
    T.rank_one = RankOneData{k, HCoeffVec::polynomial(std::move(uc)), HCoeffVec::polynomial({1.0})};
    (void)tol;
    return T;
}

} // namespace qnops
