#include "qnops/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qnops/errors.hpp"

namespace qnops {

namespace {

std::vector<HCoeffVec> columns_to_vectors(const Eigen::MatrixXcd& m, const std::vector<int>& idx) {
    std::vector<HCoeffVec> out;
    out.reserve(idx.size());
    for (int j : idx) {
        std::vector<cplx> c(static_cast<std::size_t>(m.rows()));
        for (Eigen::Index n = 0; n < m.rows(); ++n) c[static_cast<std::size_t>(n)] = m(n, j);
        out.emplace_back(std::move(c));
    }
    return out;
}

Eigen::MatrixXcd vectors_to_matrix(const std::vector<HCoeffVec>& vs, int rows) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, static_cast<Eigen::Index>(vs.size()));
    for (std::size_t j = 0; j < vs.size(); ++j)
        for (int n = 0; n < rows && n < static_cast<int>(vs[j].length()); ++n)
            m(n, static_cast<Eigen::Index>(j)) = vs[j].coeff(static_cast<std::size_t>(n));
    return m;
}

double arg_in_two_pi(cplx z) {
    double a = std::arg(z);
    if (a < 0) a += 2.0 * M_PI;
    return a;
}

} // namespace

ModulusSpectrum modulus_spectrum(const TruncOperator& T, const Tolerances& tol) {
    T.require_window(2, "modulus_spectrum");
    const int w = T.trusted_columns(2);
    const int N = T.size();

    Eigen::MatrixXcd full_defect =
        Eigen::MatrixXcd::Identity(N, N) - T.mat.adjoint() * T.mat;

    // Compactness proxy: defect columns must have decayed below the
    // tail target before the trusted window's edge.
    const int edge = std::max(4, 2 * T.step);
    for (int j = std::max(0, w - edge); j < w; ++j)
        if (full_defect.col(j).head(w).norm() > tol.tail_target)
            throw DomainError("modulus_spectrum: not compact-perturbation-like at this truncation");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        (T.mat.adjoint() * T.mat).topLeftCorner(w, w));
    Eigen::VectorXd sv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();

    ModulusSpectrum out;
    out.window = w;

    // Single-linkage clusters over the ascending eigenvalue list.
    std::vector<std::pair<int, int>> clusters;
    int start = 0;
    for (int i = 1; i <= w; ++i) {
        if (i == w || sv(i) - sv(i - 1) > tol.group_tol) {
            clusters.emplace_back(start, i);
            start = i;
        }
    }

    for (auto [lo, hi] : clusters) {
        double mean = 0.0;
        for (int i = lo; i < hi; ++i) mean += sv(i);
        mean /= (hi - lo);
        std::vector<int> idx(static_cast<std::size_t>(hi - lo));
        std::iota(idx.begin(), idx.end(), lo);

        if (std::abs(mean - 1.0) <= tol.group_tol) {
            out.unital_dim += hi - lo;
            auto vs = columns_to_vectors(es.eigenvectors(), idx);
            out.unital_basis.insert(out.unital_basis.end(), vs.begin(), vs.end());
            continue;
        }
        ModulusGroup g;
        g.value = mean <= tol.group_tol ? 0.0 : mean;
        g.multiplicity = hi - lo;
        g.eigenbasis = columns_to_vectors(es.eigenvectors(), idx);
        if (g.value == 0.0) out.kernel_dim += g.multiplicity;
        out.groups.push_back(std::move(g));
    }
    return out;
}

DiagIsometryForm extract_decomposition(const TruncOperator& T, const Tolerances& tol) {
    double res = quasinormal_residual(T);
    if (res > tol.residual_tol)
        throw DomainError("extract_decomposition: operator is not quasinormal (residual " +
                          std::to_string(res) + ")");

    ModulusSpectrum spec = modulus_spectrum(T, tol);
    PolarDecomposition polar = polar_decomposition(T, tol);
    const int N = T.size();

    DiagIsometryForm out;
    out.c_flag = spec.unital_dim > 0 ? 1 : 0;
    out.isometry_basis = spec.unital_basis;

    double invariance_gap = 0.0;
    for (const auto& g : spec.groups) {
        Eigen::MatrixXcd Q = vectors_to_matrix(g.eigenbasis, N);
        if (g.value == 0.0) {
            // kernel of the modulus: T vanishes there and the diagonal
            // entries are zero
            for (int j = 0; j < g.multiplicity; ++j) out.diag_entries.push_back(0.0);
            for (const auto& b : g.eigenbasis) out.diag_basis.push_back(b);
            continue;
        }

        // The partial isometry must map each modulus eigenspace into
        // itself; the gap feeds the final residual.
        Eigen::MatrixXcd VQ = polar.partial_isometry.mat * Q;
        Eigen::MatrixXcd B = Q.adjoint() * VQ;
        invariance_gap = std::max(invariance_gap, (VQ - Q * B).cwiseAbs().maxCoeff());

        // B is unitary on the eigenspace; its Schur form is diagonal
        // and carries the phases.
        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(B);
        const Eigen::MatrixXcd& S = schur.matrixT();
        Eigen::MatrixXcd offdiag = S;
        offdiag.diagonal().setZero();
        invariance_gap = std::max(invariance_gap, offdiag.cwiseAbs().maxCoeff());

        Eigen::MatrixXcd rotated = Q * schur.matrixU();
        std::vector<int> order(static_cast<std::size_t>(g.multiplicity));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return arg_in_two_pi(S(a, a)) < arg_in_two_pi(S(b, b));
        });
        for (int j : order) {
            cplx phase = S(j, j) / std::abs(S(j, j));
            out.diag_entries.push_back(g.value * phase);
            std::vector<cplx> c(static_cast<std::size_t>(N));
            for (int n = 0; n < N; ++n) c[static_cast<std::size_t>(n)] = rotated(n, j);
            out.diag_basis.emplace_back(std::move(c));
        }
    }

    // Conjugation check: T acts diagonally on diag_basis, isometrically
    // on isometry_basis, and the two blocks do not couple.
    double resid = invariance_gap;
    Eigen::MatrixXcd D = vectors_to_matrix(out.diag_basis, N);
    for (std::size_t j = 0; j < out.diag_basis.size(); ++j) {
        Eigen::VectorXcd q = D.col(static_cast<Eigen::Index>(j));
        resid = std::max(resid, (T.mat * q - out.diag_entries[j] * q).norm());
    }
    if (!out.isometry_basis.empty()) {
        Eigen::MatrixXcd Biso = vectors_to_matrix(out.isometry_basis, N);
        Eigen::MatrixXcd TB = T.mat * Biso;
        Eigen::MatrixXcd gram = TB.adjoint() * TB;
        resid = std::max(resid, (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols()))
                                    .cwiseAbs()
                                    .maxCoeff());
        if (D.cols() > 0) {
            resid = std::max(resid, (D.adjoint() * TB).cwiseAbs().maxCoeff());
            resid = std::max(resid, (Biso.adjoint() * T.mat * D).cwiseAbs().maxCoeff());
        }
    }
    out.residual = resid;
    if (resid > 100 * tol.rank_tol * std::max(1.0, T.column_scale()))
        throw ConsistencyAlarm("extract_decomposition: conjugated form residual " +
                               std::to_string(resid) + " exceeds tolerance");
    return out;
}

SynthesisResult synthesize(const std::vector<cplx>& diag_entries, const IsometrySpec& iso, int N,
                           const Tolerances& tol) {
    const int m = static_cast<int>(diag_entries.size());
    for (const auto& e : diag_entries)
        if (!(std::abs(e) <= 1e6)) throw DomainError("synthesize: entry magnitude out of range");

    SynthesisResult out;
    int step = 0;
    int exact = 0;

    switch (iso.kind) {
        case IsometrySpec::none: {
            if (m == 0) throw DomainError("synthesize: empty diagonal with no isometry part");
            N = m;
            out.op.mat = Eigen::MatrixXcd::Zero(N, N);
            exact = N;
            break;
        }
        case IsometrySpec::shift: {
            int k = iso.shift_multiplicity;
            if (k <= 0) throw DomainError("synthesize: shift multiplicity must be >= 1");
            if (N < m + 4 * k + 4)
                throw TruncationError("synthesize: truncation too small", m + 4 * k + 4);
            out.op.mat = Eigen::MatrixXcd::Zero(N, N);
            for (int n = m; n + k < N; ++n) out.op.mat(n + k, n) = 1.0;
            step = k;
            exact = N - k;
            break;
        }
        case IsometrySpec::matrix: {
            if (iso.block.rows() != iso.block.cols())
                throw DomainError("synthesize: isometry block must be square");
            Eigen::MatrixXcd g = iso.block.adjoint() * iso.block;
            if ((g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() >
                tol.rank_tol)
                throw DomainError("synthesize: supplied block is not an isometry");
            N = m + static_cast<int>(iso.block.rows());
            out.op.mat = Eigen::MatrixXcd::Zero(N, N);
            out.op.mat.bottomRightCorner(iso.block.rows(), iso.block.cols()) = iso.block;
            exact = N;
            break;
        }
    }

    for (int j = 0; j < m; ++j) out.op.mat(j, j) = diag_entries[static_cast<std::size_t>(j)];
    out.op.exact_window = exact;
    out.op.step = step;

    // Split T = D1 + (U_P (+) cU): phases of the diagonal entries make
    // the unimodular part, the remainder is the compact part.
    out.isometry_part = out.op;
    out.compact_part = out.op;
    out.compact_part.mat.setZero();
    for (int j = 0; j < m; ++j) {
        cplx e = diag_entries[static_cast<std::size_t>(j)];
        cplx phase = std::abs(e) > 0.0 ? e / std::abs(e) : cplx(1.0);
        out.isometry_part.mat(j, j) = phase;
        out.compact_part.mat(j, j) = e - phase;
    }

    double rebuilt =
        (out.op.mat - (out.isometry_part.mat + out.compact_part.mat)).cwiseAbs().maxCoeff();
    if (rebuilt > 0.0) throw ConsistencyAlarm("synthesize: split does not reassemble exactly");
    if (!is_isometry(out.isometry_part, tol.rank_tol))
        throw ConsistencyAlarm("synthesize: isometry part failed the isometry check");

    double res = quasinormal_residual(out.op);
    if (res > tol.residual_tol)
        throw ConsistencyAlarm("synthesize: assembled operator is not quasinormal (residual " +
                               std::to_string(res) + ")");
    return out;
}

std::vector<HCoeffVec> reducing_subspace(const TruncOperator& T, const Tolerances& tol) {
    if (is_isometry(T, tol.residual_tol))
        throw DomainError("reducing_subspace: operator is an isometry (precondition requires non-isometric)");
    double res = quasinormal_residual(T);
    if (res > tol.residual_tol)
        throw DomainError("reducing_subspace: operator is not quasinormal (residual " +
                          std::to_string(res) + ")");

    const int N = T.size();
    const int w = T.trusted_columns(2);

    auto commutation_gap = [&](const std::vector<HCoeffVec>& basis) {
        Eigen::MatrixXcd B = vectors_to_matrix(basis, N);
        Eigen::MatrixXcd P = B * B.adjoint();
        Eigen::MatrixXcd C = P * T.mat - T.mat * P;
        return C.topLeftCorner(w, w).cwiseAbs().maxCoeff();
    };
    const double accept = 100 * tol.rank_tol * std::max(1.0, T.column_scale());

    DefectData d = defect(T, tol);
    if (d.defect_rank > 0 && d.defect_rank < w && commutation_gap(d.range_basis) <= accept)
        return d.range_basis;

    // Defect range dense in the window (or rejected): fall back to a
    // proper eigenspace of the modulus.
    ModulusSpectrum spec = modulus_spectrum(T, tol);
    for (const auto& g : spec.groups) {
        if (g.multiplicity <= 0 || g.multiplicity >= w) continue;
        if (commutation_gap(g.eigenbasis) <= accept) return g.eigenbasis;
    }
    if (spec.unital_dim > 0 && spec.unital_dim < w && commutation_gap(spec.unital_basis) <= accept)
        return spec.unital_basis;

    throw ConsistencyAlarm("reducing_subspace: no verified reducing subspace found for a "
                           "quasinormal non-isometric input");
}

} // namespace qnops
