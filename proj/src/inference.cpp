#include "hdinf/inference.hpp"

#include <cmath>

#include "hdinf/gauss.hpp"

namespace hdinf {

std::string variance_source_name(VarianceSource s) {
    switch (s) {
        case VarianceSource::plug_in_theta_diag: return "plug_in_theta_diag";
        case VarianceSource::sandwich: return "sandwich";
        case VarianceSource::oracle: return "oracle";
    }
    return "plug_in_theta_diag";
}

VarianceSource variance_source_from_name(const std::string& name) {
    if (name == "plug_in_theta_diag") return VarianceSource::plug_in_theta_diag;
    if (name == "sandwich") return VarianceSource::sandwich;
    if (name == "oracle") return VarianceSource::oracle;
    throw InvalidArgument("unknown variance source: " + name);
}

DenseVector desparsified_lasso(const DenseVector& beta_hat, const DenseMatrix& theta_hat,
                               const DenseMatrix& x, const DenseVector& y) {
    const std::size_t n = x.rows, p = x.cols;
    if (beta_hat.size() != p || theta_hat.rows != p || theta_hat.cols != p || y.size() != n)
        throw DimensionMismatch("desparsified_lasso: dimension mismatch");
    // R = Y - X beta_hat
    DenseVector r = y;
    for (std::size_t j = 0; j < p; ++j) {
        const double bj = beta_hat[j];
        if (bj == 0.0) continue;
        const double* col = x.col(j);
        for (std::size_t i = 0; i < n; ++i) r[i] -= col[i] * bj;
    }
    DenseVector score = matvec_t(x, r); // X^T R
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : score.data) v *= inv_n;
    // b = beta_hat + Theta^T score
    DenseVector correction = matvec_t(theta_hat, score);
    return add_scaled(beta_hat, 1.0, correction);
}

double functional_estimate(const DenseVector& xi, const DenseVector& beta_hat,
                           const DenseMatrix& theta_hat, const DenseMatrix& x,
                           const DenseVector& y) {
    if (xi.size() != beta_hat.size())
        throw DimensionMismatch("functional_estimate: xi length mismatch");
    const DenseVector b = desparsified_lasso(beta_hat, theta_hat, x, y);
    return dot(xi, b);
}

double variance_estimate_linear(const DenseVector& xi, const DenseMatrix& theta_hat,
                                const DenseMatrix& sigma_hat, std::size_t n,
                                double sigma_noise, VarianceSource source) {
    const std::size_t p = theta_hat.rows;
    if (xi.size() != p || theta_hat.cols != p)
        throw DimensionMismatch("variance_estimate_linear: dimension mismatch");
    if (n < 1) throw InvalidArgument("variance_estimate_linear: need n >= 1");

    double per_sample = 0.0;
    switch (source) {
        case VarianceSource::plug_in_theta_diag:
        case VarianceSource::oracle:
            per_sample = quadratic_form(xi, theta_hat, xi);
            break;
        case VarianceSource::sandwich: {
            if (sigma_hat.rows != p || sigma_hat.cols != p)
                throw DimensionMismatch("variance_estimate_linear: sigma_hat mismatch");
            const DenseVector tx = matvec(theta_hat, xi);
            per_sample = quadratic_form(tx, sigma_hat, tx);
            break;
        }
    }
    if (per_sample < -1e-12)
        throw NegativeVariance("variance_estimate_linear: quadratic form " +
                               std::to_string(per_sample));
    per_sample = std::max(per_sample, 0.0);
    return per_sample * sigma_noise * sigma_noise / static_cast<double>(n);
}

std::pair<double, double> confidence_interval(double value, double variance, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidLevel("confidence_interval: level in (0,1)");
    if (variance < 0.0) throw NegativeVariance("confidence_interval: negative variance");
    if (variance == 0.0) return {value, value};
    const double z = inverse_normal_cdf(0.5 * (1.0 + level));
    const double half = z * std::sqrt(variance);
    return {value - half, value + half};
}

DebiasedEstimate make_debiased_estimate(double value, double variance, double level,
                                        VarianceSource source) {
    DebiasedEstimate e;
    e.value = value;
    e.variance = variance;
    e.std_error = std::sqrt(variance);
    std::tie(e.ci_lo, e.ci_hi) = confidence_interval(value, variance, level);
    e.level = level;
    e.variance_source = source;
    return e;
}

DenseMatrix desparsified_precision(const DenseMatrix& theta_hat, const DenseMatrix& sigma_hat) {
    const std::size_t p = theta_hat.rows;
    if (theta_hat.cols != p || sigma_hat.rows != p || sigma_hat.cols != p)
        throw DimensionMismatch("desparsified_precision: dimension mismatch");
    const DenseMatrix st = matmul(sigma_hat, theta_hat);      // Sigma Theta
    const DenseMatrix m = matmul(transpose(theta_hat), st);   // Theta^T Sigma Theta
    DenseMatrix t(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i <= j; ++i) {
            const double v =
                theta_hat(i, j) + theta_hat(j, i) - 0.5 * (m(i, j) + m(j, i));
            t(i, j) = v;
            t(j, i) = v;
        }
    }
    return t;
}

DebiasedEstimate precision_entry_inference(const DenseMatrix& t_hat,
                                           const DenseMatrix& theta_hat, std::size_t i,
                                           std::size_t j, std::size_t n, double level) {
    const std::size_t p = t_hat.rows;
    if (i >= p || j >= p) throw IndexOutOfRange("precision_entry_inference: entry out of range");
    if (theta_hat.rows != p || theta_hat.cols != p || t_hat.cols != p)
        throw DimensionMismatch("precision_entry_inference: dimension mismatch");
    if (n < 1) throw InvalidArgument("precision_entry_inference: need n >= 1");
    const double value = t_hat(i, j);
    // Theta_ij Theta_ji rather than Theta_ij^2: the nodewise Theta_hat is only
    // approximately symmetric; the product reduces to the square at symmetry.
    const double per_sample = theta_hat(i, i) * theta_hat(j, j) + theta_hat(i, j) * theta_hat(j, i);
    const double variance = per_sample / static_cast<double>(n);
    return make_debiased_estimate(value, variance, level, VarianceSource::plug_in_theta_diag);
}

} // namespace hdinf
