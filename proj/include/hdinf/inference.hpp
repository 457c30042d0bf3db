#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <tuple>
#include <utility>

#include "hdinf/linalg.hpp"

namespace hdinf {

enum class VarianceSource { plug_in_theta_diag, sandwich, oracle };

std::string variance_source_name(VarianceSource s);
VarianceSource variance_source_from_name(const std::string& name);

struct DebiasedEstimate {
    double value = 0.0;
    double variance = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double level = 0.95;
    VarianceSource variance_source = VarianceSource::plug_in_theta_diag;
};

struct PrecisionEstimate {
    DenseMatrix t_hat;
    std::optional<std::tuple<std::size_t, std::size_t, DebiasedEstimate>> entry;
};

// One-step bias correction of a penalized estimate:
//   b = beta_hat + Theta_hat^T X^T (Y - X beta_hat) / n.
DenseVector desparsified_lasso(const DenseVector& beta_hat, const DenseMatrix& theta_hat,
                               const DenseMatrix& x, const DenseVector& y);

// xi^T b for a known contrast xi.
double functional_estimate(const DenseVector& xi, const DenseVector& beta_hat,
                           const DenseMatrix& theta_hat, const DenseMatrix& x,
                           const DenseVector& y);

// Variance of the de-biased linear functional:
//   plug_in_theta_diag: xi^T Theta_hat xi sigma^2 / n
//   sandwich: conditional variance of the linear term,
//             (Theta_hat xi)^T Sigma_hat (Theta_hat xi) sigma^2 / n
//   oracle: same as plug-in but with the population Theta_0 passed in
double variance_estimate_linear(const DenseVector& xi, const DenseMatrix& theta_hat,
                                const DenseMatrix& sigma_hat, std::size_t n,
                                double sigma_noise, VarianceSource source);

// Normal interval value +- z((1+level)/2) sqrt(variance).
std::pair<double, double> confidence_interval(double value, double variance, double level);

DebiasedEstimate make_debiased_estimate(double value, double variance, double level,
                                        VarianceSource source);

// De-sparsified precision matrix T = Theta + Theta^T - Theta^T Sigma_hat Theta,
// symmetric by construction.
DenseMatrix desparsified_precision(const DenseMatrix& theta_hat, const DenseMatrix& sigma_hat);

// Entry estimate T_ij with plug-in variance (Theta_ii Theta_jj + Theta_ij Theta_ji)/n.
DebiasedEstimate precision_entry_inference(const DenseMatrix& t_hat,
                                           const DenseMatrix& theta_hat, std::size_t i,
                                           std::size_t j, std::size_t n, double level);

} // namespace hdinf
