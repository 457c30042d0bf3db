#include "hdinf/nodewise.hpp"

#include <cmath>
#include <limits>

#include "hdinf/parallel.hpp"

namespace hdinf {

namespace {

constexpr double kTauFloor = 1e-12;

} // namespace

NodewiseColumnFit fit_nodewise_column_gram(const DenseMatrix& sigma_hat, std::size_t j,
                                           double lambda_j, const LassoConfig& cfg) {
    const std::size_t p = sigma_hat.cols;
    if (sigma_hat.rows != p) throw DimensionMismatch("fit_nodewise_column_gram: not square");
    if (j >= p) throw IndexOutOfRange("fit_nodewise_column_gram: column index out of range");
    if (!(lambda_j > 0.0)) throw InvalidArgument("fit_nodewise_column_gram: lambda_j must be > 0");

    // Sufficient statistics of the regression of X_j on X_{-j}.
    DenseMatrix sub(p - 1, p - 1);
    DenseVector xty(p - 1);
    for (std::size_t c = 0, cc = 0; c < p; ++c) {
        if (c == j) continue;
        xty[cc] = sigma_hat(c, j);
        for (std::size_t r = 0, rr = 0; r < p; ++r) {
            if (r == j) continue;
            sub(rr, cc) = sigma_hat(r, c);
            ++rr;
        }
        ++cc;
    }
    const double yty = sigma_hat(j, j);

    LassoFit lf = fit_lasso_gram(sub, xty, yty, lambda_j, cfg);

    NodewiseColumnFit fit;
    fit.j = j;
    fit.gamma_hat = std::move(lf.beta_hat);
    fit.lambda_j = lambda_j;
    fit.converged = lf.converged;
    fit.kkt_violation = lf.kkt_violation;
    fit.sparsity = norm0(fit.gamma_hat);

    // tau_j^2 = |X_j - X_{-j} gamma|_n^2 + lambda_j |gamma|_1; the first term
    // equals the residual part of the lasso objective.
    const double resid_nsq = lf.objective - 2.0 * lambda_j * norm1(fit.gamma_hat);
    fit.tau_sq = resid_nsq + lambda_j * norm1(fit.gamma_hat);
    if (fit.tau_sq < kTauFloor)
        throw DegenerateNoise("nodewise column " + std::to_string(j) +
                              ": tau^2 = " + std::to_string(fit.tau_sq) +
                              " below floor (collinear design)");

    fit.theta_col = DenseVector(p);
    const double inv_tau = 1.0 / fit.tau_sq;
    fit.theta_col[j] = inv_tau;
    for (std::size_t c = 0, cc = 0; c < p; ++c) {
        if (c == j) continue;
        fit.theta_col[c] = -fit.gamma_hat[cc] * inv_tau;
        ++cc;
    }
    return fit;
}

NodewiseColumnFit fit_nodewise_column(const DenseMatrix& x, std::size_t j,
                                      double lambda_j, const LassoConfig& cfg) {
    return fit_nodewise_column_gram(gram(x), j, lambda_j, cfg);
}

NodewiseFit assemble_theta(std::vector<NodewiseColumnFit> column_fits) {
    const std::size_t p = column_fits.size();
    if (p == 0) throw InconsistentDimensions("assemble_theta: no column fits");
    for (std::size_t j = 0; j < p; ++j) {
        if (column_fits[j].j != j)
            throw InconsistentDimensions("assemble_theta: fits out of order");
        if (column_fits[j].theta_col.size() != p)
            throw InconsistentDimensions("assemble_theta: column length != number of fits");
    }
    NodewiseFit fit;
    fit.theta_hat = DenseMatrix(p, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < p; ++i) fit.theta_hat(i, j) = column_fits[j].theta_col[i];
    fit.columns = std::move(column_fits);
    return fit;
}

double surrogate_inverse_violation(const DenseMatrix& sigma_hat, const NodewiseFit& fit) {
    const std::size_t p = fit.columns.size();
    if (sigma_hat.rows != p || sigma_hat.cols != p)
        throw DimensionMismatch("surrogate_inverse_violation: dimension mismatch");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p; ++j) {
        const DenseVector prod = matvec(sigma_hat, fit.columns[j].theta_col);
        double sup = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double e = std::abs(prod[i] - (i == j ? 1.0 : 0.0));
            if (e > sup) sup = e;
        }
        const double slack = sup - fit.columns[j].lambda_j / fit.columns[j].tau_sq;
        if (slack > worst) worst = slack;
    }
    return worst;
}

std::size_t column_sparsity(const NodewiseColumnFit& fit) {
    return norm0(fit.gamma_hat);
}

NodewiseFit fit_nodewise_gram(const DenseMatrix& sigma_hat, double lambda,
                              const LassoConfig& cfg, unsigned workers) {
    const std::size_t p = sigma_hat.cols;
    std::vector<NodewiseColumnFit> cols(p);
    std::vector<std::exception_ptr> errors(p);
    parallel_for(p, workers, [&](std::size_t j) {
        try {
            cols[j] = fit_nodewise_column_gram(sigma_hat, j, lambda, cfg);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    NodewiseFit fit = assemble_theta(std::move(cols));
    fit.max_surrogate_violation = std::max(0.0, surrogate_inverse_violation(sigma_hat, fit));
    return fit;
}

NodewiseFit fit_nodewise(const DenseMatrix& x, double lambda, const LassoConfig& cfg,
                         unsigned workers) {
    return fit_nodewise_gram(gram(x), lambda, cfg, workers);
}

} // namespace hdinf
