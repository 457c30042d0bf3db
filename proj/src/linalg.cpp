#include "hdinf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hdinf {

namespace {

constexpr double kCholeskyPivotFloor = 1e-12;

void require(bool cond, const char* msg) {
    if (!cond) throw InvalidArgument(msg);
}

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + ": non-finite entry");
    }
}

void check_symmetric(const DenseMatrix& a, const char* what) {
    if (a.rows != a.cols) throw DimensionMismatch(std::string(what) + ": matrix not square");
    for (std::size_t j = 0; j < a.cols; ++j) {
        for (std::size_t i = j + 1; i < a.rows; ++i) {
            const double d = std::abs(a(i, j) - a(j, i));
            const double scale = std::max({1.0, std::abs(a(i, j)), std::abs(a(j, i))});
            if (d > 1e-10 * scale)
                throw InvalidArgument(std::string(what) + ": matrix not symmetric within 1e-10");
        }
    }
}

} // namespace

DenseMatrix DenseMatrix::identity(std::size_t p) {
    DenseMatrix m(p, p);
    for (std::size_t j = 0; j < p; ++j) m(j, j) = 1.0;
    return m;
}

DenseVector DenseVector::unit(std::size_t p, std::size_t j) {
    if (j >= p) throw IndexOutOfRange("unit vector index out of range");
    DenseVector v(p);
    v[j] = 1.0;
    return v;
}

double dot(const DenseVector& a, const DenseVector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const DenseVector& v) {
    double s = 0.0;
    for (double x : v.data) s += x * x;
    return std::sqrt(s);
}

double norm1(const DenseVector& v) {
    double s = 0.0;
    for (double x : v.data) s += std::abs(x);
    return s;
}

double norm_inf(const DenseVector& v) {
    double s = 0.0;
    for (double x : v.data) s = std::max(s, std::abs(x));
    return s;
}

std::size_t norm0(const DenseVector& v) {
    std::size_t c = 0;
    for (double x : v.data) c += (x != 0.0);
    return c;
}

DenseVector add_scaled(const DenseVector& a, double c, const DenseVector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("add_scaled: length mismatch");
    DenseVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * b[i];
    return r;
}

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
    if (a.cols != x.size()) throw DimensionMismatch("matvec: dimension mismatch");
    DenseVector y(a.rows);
    for (std::size_t j = 0; j < a.cols; ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const double* col = a.col(j);
        for (std::size_t i = 0; i < a.rows; ++i) y[i] += col[i] * xj;
    }
    return y;
}

DenseVector matvec_t(const DenseMatrix& a, const DenseVector& x) {
    if (a.rows != x.size()) throw DimensionMismatch("matvec_t: dimension mismatch");
    DenseVector y(a.cols);
    for (std::size_t j = 0; j < a.cols; ++j) {
        const double* col = a.col(j);
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows; ++i) s += col[i] * x[i];
        y[j] = s;
    }
    return y;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw DimensionMismatch("matmul: dimension mismatch");
    DenseMatrix c(a.rows, b.cols);
    for (std::size_t j = 0; j < b.cols; ++j) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double bkj = b(k, j);
            if (bkj == 0.0) continue;
            const double* acol = a.col(k);
            double* ccol = c.col(j);
            for (std::size_t i = 0; i < a.rows; ++i) ccol[i] += acol[i] * bkj;
        }
    }
    return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols, a.rows);
    for (std::size_t j = 0; j < a.cols; ++j)
        for (std::size_t i = 0; i < a.rows; ++i) t(j, i) = a(i, j);
    return t;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatch("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k)
        m = std::max(m, std::abs(a.data[k] - b.data[k]));
    return m;
}

DenseMatrix cholesky(const DenseMatrix& a) {
    check_symmetric(a, "cholesky");
    check_finite(a.data, "cholesky");
    const std::size_t p = a.rows;
    DenseMatrix l(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= kCholeskyPivotFloor)
            throw NotPositiveDefinite("cholesky: pivot " + std::to_string(d) +
                                      " at column " + std::to_string(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

namespace {

// Solves L y = b (forward) then L^T x = y (backward).
void cholesky_solve_inplace(const DenseMatrix& l, double* b) {
    const std::size_t p = l.rows;
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
        b[i] = s / l(i, i);
    }
    for (std::size_t ii = p; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < p; ++k) s -= l(k, ii) * b[k];
        b[ii] = s / l(ii, ii);
    }
}

} // namespace

DenseMatrix invert_spd(const DenseMatrix& a) {
    const DenseMatrix l = cholesky(a);
    const std::size_t p = a.rows;
    DenseMatrix inv(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        double* col = inv.col(j);
        col[j] = 1.0;
        cholesky_solve_inplace(l, col);
    }
    // symmetrize away round-off
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = j + 1; i < p; ++i) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

DenseVector solve_spd(const DenseMatrix& a, const DenseVector& b) {
    if (a.rows != b.size()) throw DimensionMismatch("solve_spd: dimension mismatch");
    const DenseMatrix l = cholesky(a);
    DenseVector x = b;
    cholesky_solve_inplace(l, x.data.data());
    return x;
}

DenseMatrix gram(const DenseMatrix& x) {
    require(x.rows >= 1, "gram: need n >= 1");
    const std::size_t n = x.rows, p = x.cols;
    DenseMatrix g(p, p);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < p; ++j) {
        const double* xj = x.col(j);
        for (std::size_t k = j; k < p; ++k) {
            const double* xk = x.col(k);
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += xj[i] * xk[i];
            s *= inv_n;
            g(k, j) = s;
            g(j, k) = s;
        }
    }
    return g;
}

double quadratic_form(const DenseVector& v, const DenseMatrix& a, const DenseVector& w) {
    if (v.size() != a.rows || w.size() != a.cols)
        throw DimensionMismatch("quadratic_form: dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) {
        const double wj = w[j];
        if (wj == 0.0) continue;
        const double* col = a.col(j);
        double cs = 0.0;
        for (std::size_t i = 0; i < a.rows; ++i) cs += v[i] * col[i];
        s += cs * wj;
    }
    return s;
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& a) {
    check_symmetric(a, "symmetric_eigenvalues");
    const std::size_t p = a.rows;
    DenseMatrix m = a;
    if (p == 0) return {};
    if (p == 1) return {m(0, 0)};

    double norm = 0.0;
    for (double x : m.data) norm += x * x;
    norm = std::sqrt(norm);
    const double stop = std::max(1e-300, 1e-14 * norm);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t i = j + 1; i < p; ++i) off += 2.0 * m(i, j) * m(i, j);
        if (std::sqrt(off) < stop) break;
        for (std::size_t q = 0; q < p; ++q) {
            for (std::size_t r = q + 1; r < p; ++r) {
                const double apq = m(q, r);
                if (apq == 0.0) continue;
                const double app = m(q, q), aqq = m(r, r);
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < p; ++k) {
                    const double mkq = m(k, q), mkr = m(k, r);
                    m(k, q) = c * mkq - s * mkr;
                    m(k, r) = s * mkq + c * mkr;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double mqk = m(q, k), mrk = m(r, k);
                    m(q, k) = c * mqk - s * mrk;
                    m(r, k) = s * mqk + c * mrk;
                }
            }
        }
    }
    std::vector<double> ev(p);
    for (std::size_t j = 0; j < p; ++j) ev[j] = m(j, j);
    std::sort(ev.begin(), ev.end());
    return ev;
}

double min_eigenvalue(const DenseMatrix& a) {
    return symmetric_eigenvalues(a).front();
}

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw IoError("bad numeric cell '" + cell + "' in " + path);
            }
            if (pos != cell.size() && cell.find_first_not_of(" \t", pos) != std::string::npos)
                throw IoError("bad numeric cell '" + cell + "' in " + path);
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

void write_matrix_csv(const DenseMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            if (j) out << ',';
            out << format_double(a(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

DenseMatrix read_matrix_csv(const std::string& path) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) return DenseMatrix(0, 0);
    DenseMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
    return m;
}

void write_vector_csv(const DenseVector& v, const std::string& path) {
    DenseMatrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    write_matrix_csv(m, path);
}

DenseVector read_vector_csv(const std::string& path) {
    const DenseMatrix m = read_matrix_csv(path);
    if (m.cols > 1 && m.rows > 1) throw IoError(path + " is not a vector");
    DenseVector v(m.data.size());
    v.data = m.data;
    return v;
}

} // namespace hdinf
