#include "hdinf/bounds.hpp"

#include <cmath>

#include "hdinf/nodewise.hpp"

namespace hdinf {

namespace {

DenseVector theta_times(const DenseMatrix& theta0, const DenseVector& g_dot,
                        double* out_quad) {
    if (theta0.rows != theta0.cols || g_dot.size() != theta0.rows)
        throw DimensionMismatch("bounds: dimension mismatch");
    if (norm2(g_dot) == 0.0) throw ZeroGradient("bounds: zero gradient");
    DenseVector tg = matvec(theta0, g_dot);
    const double quad = dot(g_dot, tg);
    if (!(quad > 0.0)) throw NotPositiveDefinite("bounds: g^T Theta0 g not positive");
    *out_quad = quad;
    return tg;
}

} // namespace

DenseVector worst_subdirection(const DenseMatrix& theta0, const DenseVector& g_dot) {
    double quad = 0.0;
    DenseVector tg = theta_times(theta0, g_dot, &quad);
    for (double& v : tg.data) v /= quad;
    return tg;
}

DenseVector normalized_direction(const DenseMatrix& theta0, const DenseVector& g_dot) {
    double quad = 0.0;
    DenseVector tg = theta_times(theta0, g_dot, &quad);
    const double scale = 1.0 / std::sqrt(quad);
    for (double& v : tg.data) v *= scale;
    return tg;
}

EfficiencyBound cr_bound_linear(const DenseMatrix& theta0, const DenseVector& xi,
                                std::size_t n, double sigma_noise) {
    double quad = 0.0;
    DenseVector tg = theta_times(theta0, xi, &quad);
    EfficiencyBound b;
    b.n = n;
    b.bound_per_sample = sigma_noise * sigma_noise * quad;
    b.bound = n > 0 ? b.bound_per_sample / static_cast<double>(n) : 0.0;
    const double scale = 1.0 / std::sqrt(quad);
    for (double& v : tg.data) v *= scale;
    b.direction = std::move(tg);
    return b;
}

EfficiencyBound cr_bound_fixed(const DenseMatrix& x, std::size_t j, double lambda_j,
                               const LassoConfig& cfg, std::size_t n) {
    if (j >= x.cols) throw IndexOutOfRange("cr_bound_fixed: column index out of range");
    const NodewiseColumnFit col = fit_nodewise_column(x, j, lambda_j, cfg);
    EfficiencyBound b;
    b.n = n;
    b.bound_per_sample = 1.0 / col.tau_sq; // Theta_jj
    b.bound = n > 0 ? b.bound_per_sample / static_cast<double>(n) : 0.0;
    DenseVector dir = col.theta_col;
    const double scale = 1.0 / std::sqrt(b.bound_per_sample);
    for (double& v : dir.data) v *= scale;
    b.direction = std::move(dir);
    return b;
}

EfficiencyBound ggm_bound(const DenseMatrix& theta0, const DenseVector& xi1,
                          const DenseVector& xi2, std::size_t n) {
    const std::size_t p = theta0.rows;
    if (theta0.cols != p || xi1.size() != p || xi2.size() != p)
        throw DimensionMismatch("ggm_bound: dimension mismatch");
    const DenseVector t1 = matvec(theta0, xi1);
    const DenseVector t2 = matvec(theta0, xi2);
    const double q11 = dot(xi1, t1);
    const double q22 = dot(xi2, t2);
    const double q12 = dot(xi1, t2);
    const double sigma_sq = q11 * q22 + q12 * q12;

    EfficiencyBound b;
    b.n = n;
    b.bound_per_sample = sigma_sq;
    b.bound = n > 0 ? sigma_sq / static_cast<double>(n) : 0.0;

    // H = Theta0 (xi1 xi2^T + xi2 xi1^T) Theta0 / sigma = (t1 t2^T + t2 t1^T)/sigma
    const double inv_sigma = 1.0 / std::sqrt(sigma_sq);
    DenseMatrix h(p, p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < p; ++i)
            h(i, j) = (t1[i] * t2[j] + t2[i] * t1[j]) * inv_sigma;
    b.direction_matrix = std::move(h);
    return b;
}

double lecam_bound(const DenseMatrix& fisher, const DenseVector& g_dot) {
    if (fisher.rows != fisher.cols || g_dot.size() != fisher.rows)
        throw DimensionMismatch("lecam_bound: dimension mismatch");
    if (norm2(g_dot) == 0.0) return 0.0;
    const DenseVector sol = solve_spd(fisher, g_dot);
    return dot(g_dot, sol);
}

double minimax_rate(std::size_t n, std::size_t p, std::size_t s) {
    if (n < 2 || p < 2) throw InvalidArgument("minimax_rate: need n, p >= 2");
    const double nn = static_cast<double>(n);
    return 1.0 / std::sqrt(nn) + static_cast<double>(s) * std::log(static_cast<double>(p)) / nn;
}

MembershipReport model_membership(const DenseVector& beta, const ModelSet& set) {
    MembershipReport r;
    r.l0 = norm0(beta);
    r.l2 = norm2(beta);
    r.sparsity_ok = r.l0 <= set.d_n;
    r.l2_ok = r.l2 <= set.c2_bound;
    r.member = r.sparsity_ok && r.l2_ok;
    return r;
}

void check_admissible(EfficiencyBound& bound, const DenseVector& beta0, const ModelSet& set) {
    if (bound.direction.size() != beta0.size())
        throw DimensionMismatch("check_admissible: direction/beta0 mismatch");
    if (bound.n == 0) throw InvalidArgument("check_admissible: bound carries no n");
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(bound.n));
    const DenseVector perturbed = add_scaled(beta0, inv_sqrt_n, bound.direction);
    const MembershipReport m = model_membership(perturbed, set);
    const bool radius_ok = norm2(bound.direction) * inv_sqrt_n <=
                           set.neighborhood_c * inv_sqrt_n + 1e-15;
    bound.admissible = m.member && radius_ok;
}

double compatibility_lower_bound(const DenseMatrix& sigma) {
    return min_eigenvalue(sigma);
}

} // namespace hdinf
