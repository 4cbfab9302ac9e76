#ifndef QNOPS_LEAST_SQUARES_HPP
#define QNOPS_LEAST_SQUARES_HPP

#include <Eigen/Dense>
#include <functional>

namespace qnops {

struct LMResult {
    Eigen::VectorXd x;
    double max_abs_residual = 0.0;
    bool converged = false;
};

/// Levenberg-Marquardt with central-difference Jacobians, for the small
/// nonlinear systems the generators solve (a handful of unknowns).
inline LMResult levenberg_marquardt(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                    Eigen::VectorXd x, int max_iter = 200, double target = 1e-13) {
    const auto dim = x.size();
    Eigen::VectorXd r = f(x);
    double cost = r.squaredNorm();
    double damping = 1e-3;

    for (int it = 0; it < max_iter; ++it) {
        if (r.cwiseAbs().maxCoeff() <= target) break;

        Eigen::MatrixXd J(r.size(), dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            double h = 1e-7 * std::max(1.0, std::abs(x(j)));
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            J.col(j) = (f(xp) - f(xm)) / (2 * h);
        }

        Eigen::MatrixXd JtJ = J.transpose() * J;
        Eigen::VectorXd g = J.transpose() * r;
        bool stepped = false;
        for (int tries = 0; tries < 12; ++tries) {
            Eigen::MatrixXd A = JtJ + damping * Eigen::MatrixXd::Identity(dim, dim);
            Eigen::VectorXd delta = A.ldlt().solve(-g);
            Eigen::VectorXd xn = x + delta;
            Eigen::VectorXd rn = f(xn);
            if (rn.squaredNorm() < cost) {
                x = xn;
                r = rn;
                cost = rn.squaredNorm();
                damping = std::max(damping * 0.3, 1e-12);
                stepped = true;
                break;
            }
            damping *= 8.0;
        }
        if (!stepped) break;
    }
    return {x, r.cwiseAbs().maxCoeff(), r.cwiseAbs().maxCoeff() <= target};
}

} // namespace qnops

#endif
