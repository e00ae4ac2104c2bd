#include <doctest.h>

#include <cmath>

#include "meib/errors.hpp"
#include "meib/matrix.hpp"
#include "meib/rng.hpp"
#include "oracles.hpp"

using namespace meib;

namespace {

DenseMatrix reconstruct(const SymEig& eig) {
    const int n = static_cast<int>(eig.eigenvalues.size());
    DenseMatrix ud(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ud(i, j) = eig.eigenvectors(i, j) * eig.eigenvalues[j];
    return matmul_nt(ud, eig.eigenvectors);
}

DenseMatrix random_symmetric(Rng& rng, int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = rng.uniform(-1.0, 1.0);
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

DenseMatrix random_psd(Rng& rng, int n) {
    DenseMatrix b = testing::random_batch(rng, n, n);
    DenseMatrix m = matmul_nt(b, b);
    m *= 1.0 / n;
    return m;
}

} // namespace

TEST_CASE("sym_eig diagonal matrix") {
    const DenseMatrix m = DenseMatrix::from_rows({{2, 0}, {0, 3}});
    const SymEig eig = sym_eig(m);
    CHECK(eig.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-12));
    // Eigenvectors are the standard basis up to sign.
    for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(eig.eigenvectors(c, c)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sym_eig analytic 2x2") {
    const DenseMatrix m = DenseMatrix::from_rows({{0.5, 0.25}, {0.25, 0.5}});
    const SymEig eig = sym_eig(m);
    CHECK(eig.eigenvalues[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("sym_eig rank-one projector J3/3") {
    const double third = 1.0 / 3.0;
    const DenseMatrix m = DenseMatrix::constant(3, 3, third);
    const SymEig eig = sym_eig(m);
    CHECK(eig.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sym_eig errors") {
    CHECK_THROWS_AS(sym_eig(DenseMatrix(2, 3)), DimensionError);
    DenseMatrix bad(2, 2);
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(sym_eig(bad), NumericError);
}

TEST_CASE("sym_eig reconstruction and orthonormality on random symmetric matrices") {
    Rng rng(7);
    for (int n : {2, 3, 5, 8, 17, 33}) {
        const DenseMatrix m = random_symmetric(rng, n);
        const SymEig eig = sym_eig(m);

        const DenseMatrix rec = reconstruct(eig);
        CHECK((rec - m).frobenius_norm() / m.frobenius_norm() < 1e-8);

        const DenseMatrix utu = matmul_tn(eig.eigenvectors, eig.eigenvectors);
        CHECK((utu - DenseMatrix::identity(n)).frobenius_norm() < 1e-8);

        for (std::size_t i = 1; i < eig.eigenvalues.size(); ++i)
            CHECK(eig.eigenvalues[i - 1] <= eig.eigenvalues[i]);
    }
}

TEST_CASE("sym_eig matches the Jacobi reference spectrum") {
    Rng rng(11);
    for (int n : {3, 6, 12}) {
        const DenseMatrix m = random_symmetric(rng, n);
        const SymEig eig = sym_eig(m);
        const testing::JacobiResult ref = testing::jacobi_eig(m);
        for (int i = 0; i < n; ++i)
            CHECK(eig.eigenvalues[i] == doctest::Approx(ref.eigenvalues[i]).epsilon(1e-9));
    }
}

TEST_CASE("sym_eig symmetrizes slightly asymmetric input") {
    DenseMatrix m = DenseMatrix::from_rows({{1.0, 0.3 + 1e-12}, {0.3 - 1e-12, 2.0}});
    const SymEig eig = sym_eig(m);
    const DenseMatrix sym = DenseMatrix::from_rows({{1.0, 0.3}, {0.3, 2.0}});
    const SymEig ref = sym_eig(sym);
    CHECK(eig.eigenvalues[0] == doctest::Approx(ref.eigenvalues[0]).epsilon(1e-10));
}

TEST_CASE("spectral_power basics") {
    const DenseMatrix half_i = DenseMatrix::identity(2) * 0.5;
    const DenseMatrix sq = spectral_power(half_i, 2.0);
    CHECK(sq(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sq(0, 1) == doctest::Approx(0.0).epsilon(1e-12));

    const DenseMatrix a = DenseMatrix::from_rows({{0.5, 0.25}, {0.25, 0.5}});
    const DenseMatrix same = spectral_power(a, 1.0);
    CHECK((same - a).frobenius_norm() < 1e-10);

    // p = 2 against a direct multiply.
    const DenseMatrix direct = matmul(a, a);
    const DenseMatrix spectral = spectral_power(a, 2.0);
    CHECK((direct - spectral).frobenius_norm() < 1e-12);
    CHECK(spectral(0, 0) == doctest::Approx(0.3125).epsilon(1e-12));
    CHECK(spectral(0, 1) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("spectral_power rejects non-PSD input and bad exponents") {
    const DenseMatrix neg = DenseMatrix::from_rows({{-1.0, 0.0}, {0.0, 1.0}});
    CHECK_THROWS_AS(spectral_power(neg, 2.0), NumericError);
    CHECK_THROWS_AS(spectral_power(DenseMatrix::identity(2), 0.0), ConfigError);
    CHECK_THROWS_AS(spectral_power(DenseMatrix::identity(2), -1.0), ConfigError);
}

TEST_CASE("spectral_power involution on random PSD matrices") {
    Rng rng(23);
    for (double p : {2.0, 3.0}) {
        for (int n : {4, 9}) {
            const DenseMatrix a = random_psd(rng, n);
            const DenseMatrix round_trip = spectral_power(spectral_power(a, p), 1.0 / p);
            CHECK((round_trip - a).frobenius_norm() < 1e-6);
        }
    }
}

TEST_CASE("hadamard product") {
    const DenseMatrix i2 = DenseMatrix::identity(2);
    CHECK((hadamard(i2, i2) - i2).frobenius_norm() == 0.0);

    // Constant matrix absorbs into a scale.
    Rng rng(3);
    const int n = 4;
    const DenseMatrix a = random_symmetric(rng, n);
    const DenseMatrix j_over_n = DenseMatrix::constant(n, n, 1.0 / n);
    const DenseMatrix scaled = hadamard(j_over_n, a);
    CHECK((scaled - a * (1.0 / n)).frobenius_norm() < 1e-15);

    // Random pair against the scalar loop.
    const DenseMatrix x = testing::random_batch(rng, 3, 3);
    const DenseMatrix y = testing::random_batch(rng, 3, 3);
    const DenseMatrix h = hadamard(x, y);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(h(r, c) == x(r, c) * y(r, c));

    CHECK_THROWS_AS(hadamard(DenseMatrix(2, 2), DenseMatrix(2, 3)), DimensionError);
}

TEST_CASE("matmul shapes and errors") {
    Rng rng(5);
    const DenseMatrix a = testing::random_batch(rng, 2, 3);
    const DenseMatrix b = testing::random_batch(rng, 3, 4);
    const DenseMatrix c = matmul(a, b);
    CHECK(c.rows() == 2);
    CHECK(c.cols() == 4);
    // Scalar-loop reference.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            CHECK(c(i, j) == doctest::Approx(s).epsilon(1e-14));
        }
    CHECK_THROWS_AS(matmul(a, a), DimensionError);
}

TEST_CASE("hconcat stitches views") {
    const DenseMatrix a = DenseMatrix::from_rows({{1, 2}, {3, 4}});
    const DenseMatrix b = DenseMatrix::from_rows({{5}, {6}});
    const DenseMatrix c = hconcat({a, b});
    CHECK(c.cols() == 3);
    CHECK(c(0, 2) == 5);
    CHECK(c(1, 0) == 3);
    CHECK_THROWS_AS(hconcat({a, DenseMatrix(3, 1)}), DimensionError);
}

TEST_CASE("select_rows") {
    const DenseMatrix a = DenseMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    const DenseMatrix sub = a.select_rows({2, 0});
    CHECK(sub(0, 0) == 5);
    CHECK(sub(1, 1) == 2);
    CHECK_THROWS_AS(a.select_rows({3}), DimensionError);
}
