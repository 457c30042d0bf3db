#pragma once

#include <cstddef>
#include <vector>

#include "hdinf/lasso.hpp"
#include "hdinf/linalg.hpp"

namespace hdinf {

// One column of the nodewise program: the Lasso of X_j on X_{-j}, its noise
// estimate tau_j^2 = |X_j - X_{-j} gamma|_n^2 + lambda_j |gamma|_1, and the
// resulting column of the surrogate inverse.
struct NodewiseColumnFit {
    std::size_t j = 0;
    DenseVector gamma_hat;  // length p-1, neighbour coefficients
    double tau_sq = 0.0;
    DenseVector theta_col;  // length p; theta_col[j] = 1/tau_sq
    double lambda_j = 0.0;
    std::size_t sparsity = 0; // |gamma_hat|_0
    bool converged = false;
    double kkt_violation = 0.0;
};

struct NodewiseFit {
    std::vector<NodewiseColumnFit> columns;
    DenseMatrix theta_hat; // column j = columns[j].theta_col
    // Positive part of the certificate: max over j of
    // max(0, |Sigma_hat Theta_j - e_j|_inf - lambda_j / tau_j^2).
    double max_surrogate_violation = 0.0;
};

NodewiseColumnFit fit_nodewise_column(const DenseMatrix& x, std::size_t j,
                                      double lambda_j, const LassoConfig& cfg = {});

// Gram-side entry point; sigma_hat must be gram(x) for the design in play.
NodewiseColumnFit fit_nodewise_column_gram(const DenseMatrix& sigma_hat, std::size_t j,
                                           double lambda_j, const LassoConfig& cfg = {});

NodewiseFit assemble_theta(std::vector<NodewiseColumnFit> column_fits);

// Fits all p columns with a shared lambda (the paper's uniform-in-j tuning),
// assembles Theta_hat and records the surrogate-inverse certificate. The p
// programs are independent; `workers` threads fit them concurrently with
// results assembled by column index, so the output does not depend on the
// worker count.
NodewiseFit fit_nodewise(const DenseMatrix& x, double lambda, const LassoConfig& cfg = {},
                         unsigned workers = 1);
NodewiseFit fit_nodewise_gram(const DenseMatrix& sigma_hat, double lambda,
                              const LassoConfig& cfg = {}, unsigned workers = 1);

// Signed certificate of the KKT display |Sigma_hat Theta_j - e_j|_inf <=
// lambda_j / tau_j^2: returns max over j of (|Sigma_hat Theta_j - e_j|_inf -
// lambda_j / tau_j^2). Non-positive (up to solver tolerance) for correctly
// solved programs; an exact inverse gives a strictly negative value.
double surrogate_inverse_violation(const DenseMatrix& sigma_hat, const NodewiseFit& fit);

std::size_t column_sparsity(const NodewiseColumnFit& fit);

} // namespace hdinf
