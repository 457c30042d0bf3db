#include "hdinf/lasso.hpp"

#include <cmath>

namespace hdinf {

double soft_threshold(double z, double t) {
    if (t < 0.0) throw InvalidArgument("soft_threshold: threshold must be >= 0");
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double default_lambda(std::size_t n, std::size_t p, double c) {
    if (n < 2 || p < 2) throw InvalidArgument("default_lambda: need n >= 2 and p >= 2");
    if (!(c > 0.0)) throw InvalidArgument("default_lambda: c must be > 0");
    return c * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

namespace {

double objective_from_stats(const DenseVector& beta, const DenseVector& grad,
                            const DenseVector& xty, double yty, double lambda) {
    // |Y - X beta|_n^2 = yty - 2 xty.beta + beta.grad  with grad = Sigma beta
    double lin = 0.0, quad = 0.0, l1 = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        lin += xty[j] * beta[j];
        quad += grad[j] * beta[j];
        l1 += std::abs(beta[j]);
    }
    return yty - 2.0 * lin + quad + 2.0 * lambda * l1;
}

} // namespace

LassoFit fit_lasso_gram(const DenseMatrix& sigma_hat, const DenseVector& xty,
                        double yty, double lambda, const LassoConfig& cfg) {
    const std::size_t p = sigma_hat.cols;
    if (sigma_hat.rows != p || xty.size() != p)
        throw DimensionMismatch("fit_lasso_gram: dimension mismatch");
    if (lambda < 0.0) throw InvalidArgument("fit_lasso_gram: lambda must be >= 0");
    if (!(cfg.tol > 0.0) || cfg.max_sweeps < 1)
        throw InvalidArgument("fit_lasso_gram: bad config");

    LassoFit fit;
    fit.lambda = lambda;
    fit.beta_hat = DenseVector(p);
    DenseVector grad(p); // Sigma beta, kept in sync incrementally

    for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double sjj = sigma_hat(j, j);
            if (sjj <= 0.0) continue; // zero-norm column stays at 0
            const double z = xty[j] - grad[j] + sjj * fit.beta_hat[j];
            const double bnew = soft_threshold(z, lambda) / sjj;
            const double delta = bnew - fit.beta_hat[j];
            if (delta != 0.0) {
                const double* col = sigma_hat.col(j);
                for (std::size_t k = 0; k < p; ++k) grad[k] += col[k] * delta;
                fit.beta_hat[j] = bnew;
                const double ad = std::abs(delta);
                if (ad > max_change) max_change = ad;
            }
        }
        fit.sweeps_used = sweep;
        fit.objective_trace.push_back(
            objective_from_stats(fit.beta_hat, grad, xty, yty, lambda));
        if (max_change < cfg.tol) {
            fit.converged = true;
            break;
        }
    }

    // Final objective and certificate from a freshly computed gradient, so the
    // reported values carry no incremental-update drift.
    DenseVector fresh = matvec(sigma_hat, fit.beta_hat);
    fit.objective = objective_from_stats(fit.beta_hat, fresh, xty, yty, lambda);
    double kkt = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const double gj = xty[j] - fresh[j];
        double v;
        if (fit.beta_hat[j] != 0.0) {
            v = std::abs(gj - lambda * (fit.beta_hat[j] > 0.0 ? 1.0 : -1.0));
        } else {
            v = std::max(std::abs(gj) - lambda, 0.0);
        }
        if (v > kkt) kkt = v;
    }
    fit.kkt_violation = kkt;
    return fit;
}

LassoFit fit_lasso(const DenseMatrix& x, const DenseVector& y, double lambda,
                   const LassoConfig& cfg) {
    if (x.rows != y.size()) throw DimensionMismatch("fit_lasso: X/Y mismatch");
    const DenseMatrix sigma_hat = gram(x);
    const double inv_n = 1.0 / static_cast<double>(x.rows);
    DenseVector xty = matvec_t(x, y);
    for (double& v : xty.data) v *= inv_n;
    const double yty = dot(y, y) * inv_n;
    return fit_lasso_gram(sigma_hat, xty, yty, lambda, cfg);
}

double kkt_residual_gram(const DenseMatrix& sigma_hat, const DenseVector& xty,
                         const DenseVector& beta_hat, double lambda) {
    const std::size_t p = sigma_hat.cols;
    if (xty.size() != p || beta_hat.size() != p)
        throw DimensionMismatch("kkt_residual_gram: dimension mismatch");
    const DenseVector grad = matvec(sigma_hat, beta_hat);
    double kkt = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const double gj = xty[j] - grad[j]; // X_j^T R / n
        double v;
        if (beta_hat[j] != 0.0) {
            v = std::abs(gj - lambda * (beta_hat[j] > 0.0 ? 1.0 : -1.0));
        } else {
            v = std::max(std::abs(gj) - lambda, 0.0);
        }
        if (v > kkt) kkt = v;
    }
    return kkt;
}

double kkt_residual(const DenseMatrix& x, const DenseVector& y,
                    const DenseVector& beta_hat, double lambda) {
    if (x.rows != y.size() || x.cols != beta_hat.size())
        throw DimensionMismatch("kkt_residual: dimension mismatch");
    const double inv_n = 1.0 / static_cast<double>(x.rows);
    // R = Y - X beta
    DenseVector r = y;
    for (std::size_t j = 0; j < x.cols; ++j) {
        const double bj = beta_hat[j];
        if (bj == 0.0) continue;
        const double* col = x.col(j);
        for (std::size_t i = 0; i < x.rows; ++i) r[i] -= col[i] * bj;
    }
    double kkt = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
        const double* col = x.col(j);
        double gj = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) gj += col[i] * r[i];
        gj *= inv_n;
        double v;
        if (beta_hat[j] != 0.0) {
            v = std::abs(gj - lambda * (beta_hat[j] > 0.0 ? 1.0 : -1.0));
        } else {
            v = std::max(std::abs(gj) - lambda, 0.0);
        }
        if (v > kkt) kkt = v;
    }
    return kkt;
}

} // namespace hdinf
