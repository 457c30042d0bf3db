#pragma once

#include <cstdint>
#include <string>

#include "hdinf/linalg.hpp"

namespace hdinf {

// Population covariance families. All are positive definite for the allowed
// parameter ranges; construction verifies the minimum eigenvalue.
enum class CovarianceFamily { identity, toeplitz, equicorrelation, banded_precision };

struct CovarianceSpec {
    CovarianceFamily family = CovarianceFamily::identity;
    std::size_t dim = 0;
    double rho = 0.0;        // toeplitz / equicorrelation
    std::size_t bandwidth = 0; // banded_precision
    double off_diag = 0.0;     // banded_precision
};

struct LinearModelSpec {
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t s = 0;
    double signal = 1.0;
    double sigma_noise = 1.0;
    CovarianceSpec covariance;
    std::uint64_t seed = 1;
};

// Sub-stream tags hung off a dataset seed with derive_seed; shared by
// generate_dataset and the experiment harness so both produce the same draws.
inline constexpr std::uint64_t kStreamDesign = 0xD5;
inline constexpr std::uint64_t kStreamNoise = 0x17;
inline constexpr std::uint64_t kStreamBeta = 0xBE;

// Observations plus the oracle truth they were generated from.
struct Dataset {
    DenseMatrix x;
    DenseVector y;
    DenseVector beta0;
    DenseMatrix sigma0;
    DenseMatrix theta0;
    std::uint64_t seed = 0;
};

// Builds (Sigma0, Theta0) for the requested family. For banded_precision the
// precision matrix is the primitive (unit diagonal, off_diag within the band)
// and Sigma0 is its inverse; for the other families Sigma0 is the primitive.
std::pair<DenseMatrix, DenseMatrix> build_covariance(const CovarianceSpec& spec);

// n i.i.d. rows N(0, Sigma0), generated as L z with L the Cholesky factor.
DenseMatrix sample_mvn(std::size_t n, const DenseMatrix& sigma0, std::uint64_t seed);

// Exactly s non-zeros of magnitude signal/sqrt(s) with alternating signs at
// seed-chosen positions, so that the l2 norm equals signal for every s.
DenseVector make_sparse_beta(std::size_t p, std::size_t s, double signal, std::uint64_t seed);

// Y = X beta0 + sigma_noise * z with z standard normal.
DenseVector simulate_linear(const DenseMatrix& x, const DenseVector& beta0,
                            double sigma_noise, std::uint64_t seed);

Dataset generate_dataset(const LinearModelSpec& spec);

std::string covariance_family_name(CovarianceFamily f);
CovarianceFamily covariance_family_from_name(const std::string& name);

} // namespace hdinf
