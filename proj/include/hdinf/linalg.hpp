#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hdinf/errors.hpp"

namespace hdinf {

// Dense column-major matrix. Sizes in this project stay at desk scale
// (p up to a few thousand), so plain O(p^3) routines are used throughout.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // column-major, data[i + j*rows]

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i + j * rows]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i + j * rows]; }

    double* col(std::size_t j) { return data.data() + j * rows; }
    const double* col(std::size_t j) const { return data.data() + j * rows; }

    static DenseMatrix identity(std::size_t p);
};

struct DenseVector {
    std::vector<double> data;

    DenseVector() = default;
    explicit DenseVector(std::size_t n) : data(n, 0.0) {}
    DenseVector(std::initializer_list<double> v) : data(v) {}

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    static DenseVector unit(std::size_t p, std::size_t j);
};

// ---- element-wise helpers -------------------------------------------------

double dot(const DenseVector& a, const DenseVector& b);
double norm2(const DenseVector& v);
double norm1(const DenseVector& v);
double norm_inf(const DenseVector& v);
std::size_t norm0(const DenseVector& v); // count of exact non-zeros

DenseVector add_scaled(const DenseVector& a, double c, const DenseVector& b); // a + c*b

// y = A x
DenseVector matvec(const DenseMatrix& a, const DenseVector& x);
// y = A^T x
DenseVector matvec_t(const DenseMatrix& a, const DenseVector& x);
// C = A B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// ---- factorizations -------------------------------------------------------

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// A pivot at or below 1e-12 raises NotPositiveDefinite; this floor separates
// genuine rank deficiency (e.g. a p > n Gram matrix) from round-off.
DenseMatrix cholesky(const DenseMatrix& a);

// Inverse of a symmetric positive definite matrix via its Cholesky factor.
DenseMatrix invert_spd(const DenseMatrix& a);

// Solves A x = b for SPD A.
DenseVector solve_spd(const DenseMatrix& a, const DenseVector& b);

// Gram matrix X^T X / n.
DenseMatrix gram(const DenseMatrix& x);

// v^T A w.
double quadratic_form(const DenseVector& v, const DenseMatrix& a, const DenseVector& w);

// All eigenvalues of a symmetric matrix (ascending), cyclic Jacobi iteration.
// Converges to well below 1e-10 relative at the sizes used here.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& a);

double min_eigenvalue(const DenseMatrix& a);

// ---- CSV ------------------------------------------------------------------

// Matrix CSV: comma-separated, one matrix row per line, no header, '.' decimal
// point, 17 significant digits (lossless double round trip).
void write_matrix_csv(const DenseMatrix& a, const std::string& path);
DenseMatrix read_matrix_csv(const std::string& path);

void write_vector_csv(const DenseVector& v, const std::string& path);
DenseVector read_vector_csv(const std::string& path);

} // namespace hdinf
