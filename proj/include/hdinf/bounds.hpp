#pragma once

#include <cstddef>
#include <optional>

#include "hdinf/lasso.hpp"
#include "hdinf/linalg.hpp"

namespace hdinf {

// Parameter set B(d_n) = { beta : |beta|_0 <= d_n, |beta|_2 <= C } together
// with the perturbation-radius constant c of the neighbourhood B(beta, c/sqrt(m_n)).
struct ModelSet {
    std::size_t d_n = 0;
    double c2_bound = 10.0;      // C
    double neighborhood_c = 1.0; // c
};

struct MembershipReport {
    bool member = false;
    std::size_t l0 = 0;
    double l2 = 0.0;
    bool sparsity_ok = false;
    bool l2_ok = false;
};

// A closed-form asymptotic variance lower bound. bound_per_sample is the
// n-free leading term; bound = bound_per_sample / n. The extremal perturbation
// is a vector for linear-model bounds and a matrix for the GGM bound.
struct EfficiencyBound {
    double bound_per_sample = 0.0;
    double bound = 0.0;
    std::size_t n = 0;
    DenseVector direction;            // set for linear-model bounds
    std::optional<DenseMatrix> direction_matrix; // set for the GGM bound
    std::optional<bool> admissible;   // set once checked against a ModelSet
};

// Worst possible sub-direction c0 = Theta0 g / (g^T Theta0 g).
DenseVector worst_subdirection(const DenseMatrix& theta0, const DenseVector& g_dot);

// Sigma0-normalized extremal direction h0 = Theta0 g / sqrt(g^T Theta0 g);
// satisfies h0^T Sigma0 h0 = 1.
DenseVector normalized_direction(const DenseMatrix& theta0, const DenseVector& g_dot);

// Random Gaussian design: var(T) >= (xi^T Theta0 xi + o(1)) / n.
EfficiencyBound cr_bound_linear(const DenseMatrix& theta0, const DenseVector& xi,
                                std::size_t n, double sigma_noise);

// Fixed design: var(T) >= (Theta_jj + o(1)) / n with Theta_j from the nodewise
// regression on the given design.
EfficiencyBound cr_bound_fixed(const DenseMatrix& x, std::size_t j, double lambda_j,
                               const LassoConfig& cfg, std::size_t n);

// GGM functional xi1^T Theta xi2:
//   sigma^2 = xi1^T Theta0 xi1 xi2^T Theta0 xi2 + (xi1^T Theta0 xi2)^2,
//   H = Theta0 (xi1 xi2^T + xi2 xi1^T) Theta0 / sigma.
EfficiencyBound ggm_bound(const DenseMatrix& theta0, const DenseVector& xi1,
                          const DenseVector& xi2, std::size_t n);

// Le Cam asymptotic-variance bound g^T I^{-1} g for an asymptotically linear
// estimator; coincides with the Cramer-Rao value when I = Sigma0.
double lecam_bound(const DenseMatrix& fisher, const DenseVector& g_dot);

// 1/sqrt(n) + s log(p)/n, the minimax rate shape for single entries.
double minimax_rate(std::size_t n, std::size_t p, std::size_t s);

MembershipReport model_membership(const DenseVector& beta, const ModelSet& set);

// Sets bound.admissible: beta0 + direction/sqrt(n) must stay in B(d_n) and
// within l2 distance c/sqrt(n) of beta0.
void check_admissible(EfficiencyBound& bound, const DenseVector& beta0, const ModelSet& set);

// Certified lower bound on the compatibility constant: the minimum eigenvalue
// of sigma. Negative output signals a non-PSD input.
double compatibility_lower_bound(const DenseMatrix& sigma);

} // namespace hdinf
