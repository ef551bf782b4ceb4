#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>

#include "nvmech/errors.hpp"

namespace nvmech {

struct LevMarOptions {
    int max_iter = 300;
    double ftol = 1e-12;   // relative SSR improvement
    double xtol = 1e-12;   // relative step size
    double lambda0 = 1e-3;
};

struct LevMarResult {
    Eigen::VectorXd x;
    Eigen::MatrixXd covariance; // sigma^2 (J^T J)^-1 at the solution
    double ssr = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string message;
};

// residual_fn(x, r, J): fill r (residuals, model - data) and J = dr/dx
using ResidualFn =
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>;

// damped least squares with multiplicative lambda control
inline LevMarResult levmar_fit(const ResidualFn& fn, Eigen::VectorXd x,
                               int n_residuals, const LevMarOptions& opt = {}) {
    const int np = static_cast<int>(x.size());
    Eigen::VectorXd r(n_residuals);
    Eigen::MatrixXd jac(n_residuals, np);
    fn(x, r, jac);
    double ssr = r.squaredNorm();
    double lambda = opt.lambda0;

    LevMarResult res;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        Eigen::MatrixXd a = jtj;
        for (int k = 0; k < np; ++k)
            a(k, k) += lambda * std::max(jtj(k, k), 1e-30);
        const Eigen::VectorXd step = a.ldlt().solve(-g);
        if (!step.allFinite())
            throw NumericalError("levmar: singular normal equations (rank-deficient fit)");

        const Eigen::VectorXd x_try = x + step;
        Eigen::VectorXd r_try(n_residuals);
        Eigen::MatrixXd j_try(n_residuals, np);
        fn(x_try, r_try, j_try);
        const double ssr_try = r_try.squaredNorm();

        if (ssr_try < ssr) {
            const double rel_f = (ssr - ssr_try) / std::max(ssr, 1e-300);
            const double rel_x = step.norm() / std::max(x.norm(), 1e-300);
            x = x_try;
            r.swap(r_try);
            jac.swap(j_try);
            ssr = ssr_try;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel_f < opt.ftol || rel_x < opt.xtol) {
                res.converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) break; // stuck; report last iterate
        }
    }

    res.x = x;
    res.ssr = ssr;
    res.iterations = it + 1;
    res.message = res.converged ? "converged" : "stopped before convergence";

    // covariance through the column-scaled normal equations: the parameter
    // scales differ by many orders of magnitude, so invert the correlation
    // form D (J^T J) D instead of J^T J directly
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd d(np);
    bool degenerate = false;
    for (int k = 0; k < np; ++k) {
        if (jtj(k, k) <= 0.0) degenerate = true;
        d(k) = jtj(k, k) > 0.0 ? 1.0 / std::sqrt(jtj(k, k)) : 0.0;
    }
    if (degenerate)
        throw NumericalError("levmar: rank-deficient Jacobian at final iterate");
    const Eigen::MatrixXd scaled = d.asDiagonal() * jtj * d.asDiagonal();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
    if (!lu.isInvertible())
        throw NumericalError("levmar: rank-deficient Jacobian at final iterate");
    const int dof = std::max(n_residuals - np, 1);
    res.covariance =
        d.asDiagonal() * lu.inverse() * d.asDiagonal() * (ssr / dof);
    return res;
}

} // namespace nvmech
