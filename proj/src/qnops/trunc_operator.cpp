#include "qnops/trunc_operator.hpp"

#include <algorithm>
#include <cmath>

#include "qnops/errors.hpp"

namespace qnops {

void TruncOperator::require_window(int factors, const char* who) const {
    int w = trusted_columns(factors);
    int need = std::max(4, 2 * step + 2);
    if (w < need)
        throw TruncationError(std::string(who) + ": increase truncation (trusted window " +
                                  std::to_string(w) + " < " + std::to_string(need) + ")",
                              size() + (need - w));
}

double TruncOperator::column_scale() const {
    double m = 0.0;
    for (Eigen::Index j = 0; j < mat.cols(); ++j) m = std::max(m, mat.col(j).norm());
    return m;
}

TruncOperator shift_operator(int k, int N) {
    if (k <= 0) throw DomainError("shift_operator: multiplicity must be >= 1");
    if (N <= k) throw DomainError("shift_operator: truncation must exceed the multiplicity");
    TruncOperator T;
    T.mat = Eigen::MatrixXcd::Zero(N, N);
    for (int n = 0; n + k < N; ++n) T.mat(n + k, n) = 1.0;
    T.exact_window = N - k;
    T.step = k;
    return T;
}

Eigen::MatrixXcd rank_one_matrix(const HCoeffVec& u, const HCoeffVec& v, int N) {
    Eigen::VectorXcd uc = Eigen::VectorXcd::Zero(N), vc = Eigen::VectorXcd::Zero(N);
    for (int n = 0; n < N; ++n) {
        uc(n) = u.coeff(static_cast<std::size_t>(n));
        vc(n) = v.coeff(static_cast<std::size_t>(n));
    }
    return uc * vc.adjoint();
}

TruncOperator perturbed_shift(int k, const HCoeffVec& u, const HCoeffVec& v, int N,
                              const Tolerances& tol) {
    if (k <= 0) throw DomainError("perturbed_shift: multiplicity must be >= 1");
    if (u.is_zero(0.0) || v.is_zero(0.0))
        throw DomainError("perturbed_shift: not a rank-one perturbation (u or v is zero)");
    const int need = static_cast<int>(std::max(u.tail_safe_length(tol.tail_target),
                                               v.tail_safe_length(tol.tail_target)));
    if (N < need + 4 * k + 4)
        throw TruncationError("perturbed_shift: truncation too small for the declared tails",
                              need + 4 * k + 4);

    TruncOperator T = shift_operator(k, N);
    T.mat += rank_one_matrix(u, v, N);
    T.exact_window = N - k;
    T.step = k;
    T.rank_one = RankOneData{k, u, v};
    return T;
}

TruncOperator matrix_operator(Eigen::MatrixXcd m, int N) {
    if (m.rows() != m.cols()) throw DomainError("matrix_operator: matrix must be square");
    int d = static_cast<int>(m.rows());
    if (N < 0) N = d;
    if (N < d) throw DomainError("matrix_operator: truncation smaller than the block");
    TruncOperator T;
    T.mat = Eigen::MatrixXcd::Zero(N, N);
    T.mat.topLeftCorner(d, d) = m;
    T.exact_window = N;
    T.step = 0;
    return T;
}

DefectData defect(const TruncOperator& T, const Tolerances& tol) {
    T.require_window(2, "defect");
    const int w = T.trusted_columns(2);
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(T.size(), T.size()) - T.mat.adjoint() * T.mat;

    DefectData out;
    out.defect_op = full.topLeftCorner(w, w);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.defect_op);
    std::vector<int> range_idx;
    for (int i = 0; i < w; ++i)
        if (std::abs(es.eigenvalues()(i)) > tol.rank_tol) range_idx.push_back(i);
    out.defect_rank = static_cast<int>(range_idx.size());
    out.kernel_dim_in_window = w - out.defect_rank;
    for (int i : range_idx) {
        std::vector<cplx> c(static_cast<std::size_t>(w));
        for (int n = 0; n < w; ++n) c[static_cast<std::size_t>(n)] = es.eigenvectors()(n, i);
        out.range_basis.emplace_back(std::move(c));
    }

    if (T.rank_one) {
        // For S_k + u(x)v the defect has the closed form
        // -(S_k*u (x) v + v (x) S_k*u + ||u||^2 v (x) v); the assembled
        // matrix must agree entrywise on the trusted window.
        const auto& r = *T.rank_one;
        HCoeffVec su = backward_shift(r.u, static_cast<std::size_t>(r.k));
        double u_norm_sq = norm_squared(r.u).value.real();
        Eigen::MatrixXcd cf = -(rank_one_matrix(su, r.v, w) + rank_one_matrix(r.v, su, w) +
                                u_norm_sq * rank_one_matrix(r.v, r.v, w));
        out.closed_form_gap = (cf - out.defect_op).cwiseAbs().maxCoeff();
        if (out.closed_form_gap > 10 * tol.rank_tol)
            throw ConsistencyAlarm("defect: closed form disagrees with assembled I - T*T (gap " +
                                   std::to_string(out.closed_form_gap) + ")");
    }
    return out;
}

double quasinormal_residual(const TruncOperator& T) {
    T.require_window(3, "quasinormal_residual");
    const int w = T.trusted_columns(3);
    Eigen::MatrixXcd gram = T.mat.adjoint() * T.mat;
    Eigen::MatrixXcd cogram = T.mat * T.mat.adjoint();
    Eigen::MatrixXcd chain = (gram - cogram) * T.mat.leftCols(w);
    double raw = 0.0;
    for (int j = 0; j < w; ++j) raw = std::max(raw, chain.col(j).norm());
    double s = std::max(1.0, T.column_scale());
    return raw / (s * s * s);
}

double hyponormal_min_eig(const TruncOperator& T) {
    T.require_window(2, "hyponormal_min_eig");
    const int w = T.trusted_columns(2);
    Eigen::MatrixXcd self_comm =
        (T.mat.adjoint() * T.mat - T.mat * T.mat.adjoint()).topLeftCorner(w, w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(self_comm, Eigen::EigenvaluesOnly);
    double s = std::max(1.0, T.column_scale());
    return es.eigenvalues().minCoeff() / (s * s);
}

bool is_isometry(const TruncOperator& T, double eps) {
    T.require_window(2, "is_isometry");
    const int w = T.trusted_columns(2);
    Eigen::MatrixXcd d = (T.mat.adjoint() * T.mat).topLeftCorner(w, w) -
                         Eigen::MatrixXcd::Identity(w, w);
    return d.cwiseAbs().maxCoeff() <= eps;
}

PolarDecomposition polar_decomposition(const TruncOperator& T, const Tolerances& tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(T.mat.adjoint() * T.mat);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    Eigen::VectorXd sig = lam.cwiseSqrt();

    PolarDecomposition out;
    out.modulus.mat = es.eigenvectors() * sig.asDiagonal() * es.eigenvectors().adjoint();
    out.modulus.exact_window = T.trusted_columns(2);
    out.modulus.step = T.step;

    // V = T M^+ on the numerical range of M; columns over ker M are
    // zeroed, matching ker V = ker M.
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sig.size());
    for (Eigen::Index i = 0; i < sig.size(); ++i)
        if (sig(i) > tol.rank_tol) inv(i) = 1.0 / sig(i);
    out.partial_isometry.mat =
        T.mat * es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
    out.partial_isometry.exact_window = T.trusted_columns(2);
    out.partial_isometry.step = T.step;
    return out;
}

} // namespace qnops
