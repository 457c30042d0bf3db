#include "hdinf/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hdinf/rng.hpp"

namespace hdinf {

namespace {

DenseMatrix build_primitive(const CovarianceSpec& spec) {
    const std::size_t p = spec.dim;
    DenseMatrix m(p, p);
    switch (spec.family) {
        case CovarianceFamily::identity:
            for (std::size_t j = 0; j < p; ++j) m(j, j) = 1.0;
            break;
        case CovarianceFamily::toeplitz:
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t i = 0; i < p; ++i)
                    m(i, j) = std::pow(spec.rho, std::abs(static_cast<double>(i) -
                                                          static_cast<double>(j)));
            break;
        case CovarianceFamily::equicorrelation:
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t i = 0; i < p; ++i) m(i, j) = (i == j) ? 1.0 : spec.rho;
            break;
        case CovarianceFamily::banded_precision:
            for (std::size_t j = 0; j < p; ++j) {
                m(j, j) = 1.0;
                for (std::size_t k = 1; k <= spec.bandwidth && j + k < p; ++k) {
                    m(j + k, j) = spec.off_diag;
                    m(j, j + k) = spec.off_diag;
                }
            }
            break;
    }
    return m;
}

} // namespace

std::pair<DenseMatrix, DenseMatrix> build_covariance(const CovarianceSpec& spec) {
    if (spec.dim == 0) throw InvalidArgument("build_covariance: dim must be positive");
    if ((spec.family == CovarianceFamily::toeplitz ||
         spec.family == CovarianceFamily::equicorrelation) &&
        !(std::abs(spec.rho) < 1.0))
        throw InvalidArgument("build_covariance: |rho| < 1 required");

    const DenseMatrix primitive = build_primitive(spec);
    // invert_spd raises NotPositiveDefinite for degenerate specs; additionally
    // certify strict positive definiteness of the primitive by its spectrum.
    if (min_eigenvalue(primitive) <= 0.0)
        throw NotPositiveDefinite("build_covariance: primitive matrix is not positive definite");
    const DenseMatrix inverse = invert_spd(primitive);

    if (spec.family == CovarianceFamily::banded_precision)
        return {inverse, primitive}; // (Sigma0, Theta0)
    return {primitive, inverse};
}

DenseMatrix sample_mvn(std::size_t n, const DenseMatrix& sigma0, std::uint64_t seed) {
    const std::size_t p = sigma0.rows;
    const DenseMatrix l = cholesky(sigma0);
    DenseMatrix x(n, p);
    CounterRng rng(seed);
    DenseVector z(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < p; ++k) z[k] = rng.next_normal();
        // row i of X = L z
        for (std::size_t j = 0; j < p; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += l(j, k) * z[k];
            x(i, j) = s;
        }
    }
    return x;
}

DenseVector make_sparse_beta(std::size_t p, std::size_t s, double signal, std::uint64_t seed) {
    if (s > p) throw SparsityExceedsDim("make_sparse_beta: s exceeds p");
    DenseVector beta(p);
    if (s == 0) return beta;

    // first s entries of a seeded partial Fisher-Yates permutation
    std::vector<std::size_t> idx(p);
    std::iota(idx.begin(), idx.end(), 0);
    CounterRng rng(seed);
    for (std::size_t k = 0; k < s; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.next_below(p - k));
        std::swap(idx[k], idx[j]);
    }
    std::vector<std::size_t> support(idx.begin(), idx.begin() + s);
    std::sort(support.begin(), support.end());

    const double mag = signal / std::sqrt(static_cast<double>(s));
    for (std::size_t k = 0; k < s; ++k) beta[support[k]] = (k % 2 == 0) ? mag : -mag;
    return beta;
}

DenseVector simulate_linear(const DenseMatrix& x, const DenseVector& beta0,
                            double sigma_noise, std::uint64_t seed) {
    if (x.cols != beta0.size()) throw DimensionMismatch("simulate_linear: X/beta0 mismatch");
    if (!(sigma_noise > 0.0)) throw InvalidArgument("simulate_linear: sigma_noise must be > 0");
    DenseVector y = matvec(x, beta0);
    CounterRng rng(seed);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += sigma_noise * rng.next_normal();
    return y;
}

Dataset generate_dataset(const LinearModelSpec& spec) {
    CovarianceSpec cov = spec.covariance;
    cov.dim = spec.p;
    auto [sigma0, theta0] = build_covariance(cov);
    Dataset d;
    d.beta0 = make_sparse_beta(spec.p, spec.s, spec.signal, derive_seed(spec.seed, kStreamBeta));
    d.x = sample_mvn(spec.n, sigma0, derive_seed(spec.seed, kStreamDesign));
    d.y = simulate_linear(d.x, d.beta0, spec.sigma_noise, derive_seed(spec.seed, kStreamNoise));
    d.sigma0 = std::move(sigma0);
    d.theta0 = std::move(theta0);
    d.seed = spec.seed;
    return d;
}

std::string covariance_family_name(CovarianceFamily f) {
    switch (f) {
        case CovarianceFamily::identity: return "identity";
        case CovarianceFamily::toeplitz: return "toeplitz";
        case CovarianceFamily::equicorrelation: return "equicorrelation";
        case CovarianceFamily::banded_precision: return "banded_precision";
    }
    return "identity";
}

CovarianceFamily covariance_family_from_name(const std::string& name) {
    if (name == "identity") return CovarianceFamily::identity;
    if (name == "toeplitz") return CovarianceFamily::toeplitz;
    if (name == "equicorrelation") return CovarianceFamily::equicorrelation;
    if (name == "banded_precision") return CovarianceFamily::banded_precision;
    throw InvalidArgument("unknown covariance family: " + name);
}

} // namespace hdinf
