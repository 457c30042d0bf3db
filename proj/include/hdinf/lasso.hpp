#pragma once

#include <cstddef>
#include <vector>

#include "hdinf/linalg.hpp"

namespace hdinf {

struct LassoConfig {
    double tol = 1e-8;           // max absolute coordinate change per sweep
    std::size_t max_sweeps = 100000;
    double lambda_constant = 1.4142135623730951; // c in lambda = c sqrt(log p / n)
};

struct LassoFit {
    DenseVector beta_hat;
    double lambda = 0.0;
    double objective = 0.0; // |Y - X beta|_n^2 + 2 lambda |beta|_1
    std::size_t sweeps_used = 0;
    double kkt_violation = 0.0;
    bool converged = false;
    std::vector<double> objective_trace; // one entry per completed sweep
};

// Proximal map of t|.|: sign(z) max(|z| - t, 0).
double soft_threshold(double z, double t);

// Default tuning parameter c sqrt(log(p)/n), natural log.
double default_lambda(std::size_t n, std::size_t p, double c);

// Cyclic coordinate descent for
//   min_beta |Y - X beta|_n^2 + 2 lambda |beta|_1.
// Stops when the largest coordinate change in a sweep drops below cfg.tol or
// after cfg.max_sweeps; non-convergence is reported via the converged flag,
// not an error. Columns with |X_j|_n^2 = 0 are pinned at zero.
LassoFit fit_lasso(const DenseMatrix& x, const DenseVector& y, double lambda,
                   const LassoConfig& cfg = {});

// Same solver on precomputed sufficient statistics: sigma_hat = X^T X / n,
// xty = X^T Y / n, yty = |Y|_n^2. This is what the nodewise loop uses, since
// all p programs share one Gram matrix.
LassoFit fit_lasso_gram(const DenseMatrix& sigma_hat, const DenseVector& xty,
                        double yty, double lambda, const LassoConfig& cfg = {});

// Sub-gradient optimality certificate: max over j of
//   |X_j^T R / n - lambda sign(beta_j)|            if beta_j != 0
//   max(|X_j^T R / n| - lambda, 0)                 if beta_j == 0
// with R = Y - X beta.
double kkt_residual(const DenseMatrix& x, const DenseVector& y,
                    const DenseVector& beta_hat, double lambda);

double kkt_residual_gram(const DenseMatrix& sigma_hat, const DenseVector& xty,
                         const DenseVector& beta_hat, double lambda);

} // namespace hdinf
