#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "hdinf/linalg.hpp"
#include "oracle_helpers.hpp"

using namespace hdinf;

namespace {

DenseMatrix mat2(double a, double b, double c, double d) {
    DenseMatrix m(2, 2);
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = c;
    m(1, 1) = d;
    return m;
}

} // namespace

TEST_CASE("cholesky: diagonal and hand-worked 2x2") {
    DenseMatrix d = mat2(4, 0, 0, 9);
    DenseMatrix l = cholesky(d);
    CHECK(l(0, 0) == doctest::Approx(2.0));
    CHECK(l(1, 1) == doctest::Approx(3.0));
    CHECK(l(0, 1) == 0.0);
    CHECK(l(1, 0) == 0.0);

    DenseMatrix a = mat2(1.0, 0.5, 0.5, 1.0);
    l = cholesky(a);
    CHECK(l(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(l(1, 1) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12)); // 0.8660...

    const DenseMatrix eye = DenseMatrix::identity(7);
    CHECK(max_abs_diff(cholesky(eye), eye) == 0.0);
}

TEST_CASE("cholesky: rejects indefinite and rank-deficient input") {
    CHECK_THROWS_AS(cholesky(mat2(1, 2, 2, 1)), NotPositiveDefinite);
    // p > n Gram is rank deficient
    const DenseMatrix x = oracle::random_matrix(3, 6, 11);
    CHECK_THROWS_AS(cholesky(gram(x)), NotPositiveDefinite);
    // asymmetric input violates the precondition loudly
    CHECK_THROWS_AS(cholesky(mat2(1, 0.2, 0.4, 1)), InvalidArgument);
}

TEST_CASE("cholesky: L L^T reproduces random SPD matrices (p <= 50)") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const std::size_t p = 5 + 7 * static_cast<std::size_t>(seed);
        const DenseMatrix a = oracle::random_spd(p, seed);
        const DenseMatrix l = cholesky(a);
        for (std::size_t j = 0; j < p; ++j) {
            CHECK(l(j, j) > 0.0);
            for (std::size_t i = 0; i < j; ++i) CHECK(l(i, j) == 0.0);
        }
        double scale = 0.0;
        for (double x : a.data) scale = std::max(scale, std::abs(x));
        CHECK(max_abs_diff(matmul(l, transpose(l)), a) < 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("invert_spd: closed forms and involution") {
    const DenseMatrix d = invert_spd(mat2(2, 0, 0, 4));
    CHECK(d(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d(1, 1) == doctest::Approx(0.25).epsilon(1e-12));

    // 2x2 adjugate oracle: [[1,.5],[.5,1]]^{-1} = [[4/3,-2/3],[-2/3,4/3]]
    const DenseMatrix inv = invert_spd(mat2(1, 0.5, 0.5, 1));
    CHECK(inv(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(inv(0, 1) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));

    const DenseMatrix eye = DenseMatrix::identity(5);
    CHECK(max_abs_diff(invert_spd(eye), eye) < 1e-14);

    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const DenseMatrix a = oracle::random_spd(17, seed);
        CHECK(max_abs_diff(invert_spd(invert_spd(a)), a) < 1e-6);
        // a * a^{-1} = I within 1e-8
        const DenseMatrix prod = matmul(a, invert_spd(a));
        CHECK(max_abs_diff(prod, DenseMatrix::identity(17)) < 1e-8);
    }
}

TEST_CASE("gram: small closed forms and brute-force oracle") {
    DenseMatrix x(2, 2);
    x(0, 0) = 1.0;
    x(1, 1) = 1.0;
    const DenseMatrix g = gram(x);
    CHECK(g(0, 0) == doctest::Approx(0.5));
    CHECK(g(1, 1) == doctest::Approx(0.5));
    CHECK(g(0, 1) == 0.0);

    DenseMatrix ones(4, 1);
    for (std::size_t i = 0; i < 4; ++i) ones(i, 0) = 1.0;
    CHECK(gram(ones)(0, 0) == doctest::Approx(1.0));

    const DenseMatrix r = oracle::random_matrix(5, 3, 42);
    CHECK(max_abs_diff(gram(r), oracle::gram_bruteforce(r)) < 1e-12);
}

TEST_CASE("gram: positive semidefinite for any design") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const DenseMatrix x = oracle::random_matrix(6, 9, seed); // p > n: singular but PSD
        const auto ev = symmetric_eigenvalues(gram(x));
        CHECK(ev.front() >= -1e-10);
    }
}

TEST_CASE("quadratic_form: examples and symmetry") {
    const DenseMatrix eye = DenseMatrix::identity(3);
    CHECK(quadratic_form(DenseVector::unit(3, 0), eye, DenseVector::unit(3, 0)) == 1.0);

    const DenseMatrix t = mat2(4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0);
    CHECK(quadratic_form(DenseVector::unit(2, 0), t, DenseVector::unit(2, 1)) ==
          doctest::Approx(-2.0 / 3.0).epsilon(1e-12));

    DenseVector zero(4);
    CHECK(quadratic_form(zero, DenseMatrix::identity(4), zero) == 0.0);

    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const DenseMatrix a = oracle::random_spd(8, seed);
        const DenseVector v = oracle::random_vector(8, 100 + seed);
        const DenseVector w = oracle::random_vector(8, 200 + seed);
        CHECK(quadratic_form(v, a, w) ==
              doctest::Approx(quadratic_form(w, a, v)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(quadratic_form(DenseVector(3), DenseMatrix::identity(2), DenseVector(2)),
                    DimensionMismatch);
}

TEST_CASE("symmetric_eigenvalues: known spectra") {
    DenseMatrix d(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    d(2, 2) = 7.0;
    const auto ev = symmetric_eigenvalues(d);
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(ev[2] == doctest::Approx(7.0).epsilon(1e-12));

    // toeplitz(0.5) 2x2: eigenvalues 1 +- 0.5
    const auto ev2 = symmetric_eigenvalues(mat2(1, 0.5, 0.5, 1));
    CHECK(ev2[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(ev2[1] == doctest::Approx(1.5).epsilon(1e-10));

    CHECK(min_eigenvalue(DenseMatrix::identity(12)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("csv: lossless round trip and error paths") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hdinf_csv_test";
    fs::create_directories(dir);

    DenseMatrix m = oracle::random_matrix(7, 4, 77);
    m(0, 0) = 1.0 / 3.0;
    m(1, 1) = 1e-17;
    m(2, 2) = -12345.678901234567;
    m(3, 3) = 0.0;
    const std::string path = (dir / "m.csv").string();
    write_matrix_csv(m, path);
    const DenseMatrix back = read_matrix_csv(path);
    REQUIRE(back.rows == m.rows);
    REQUIRE(back.cols == m.cols);
    for (std::size_t k = 0; k < m.data.size(); ++k) CHECK(back.data[k] == m.data[k]);

    DenseVector v = oracle::random_vector(9, 5);
    const std::string vpath = (dir / "v.csv").string();
    write_vector_csv(v, vpath);
    const DenseVector vback = read_vector_csv(vpath);
    REQUIRE(vback.size() == v.size());
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(vback[k] == v[k]);

    CHECK_THROWS_AS(read_matrix_csv((dir / "missing.csv").string()), IoError);
    {
        std::FILE* f = std::fopen((dir / "ragged.csv").string().c_str(), "w");
        std::fputs("1,2\n3\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(read_matrix_csv((dir / "ragged.csv").string()), IoError);
    {
        std::FILE* f = std::fopen((dir / "bad.csv").string().c_str(), "w");
        std::fputs("1,abc\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(read_matrix_csv((dir / "bad.csv").string()), IoError);
}
