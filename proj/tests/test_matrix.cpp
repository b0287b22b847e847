#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "ssml/matrix.hpp"
#include "ssml/random.hpp"

using namespace ssml;

namespace {
DenseMatrix random_matrix(index_t rows, index_t cols, std::uint64_t seed, std::uint64_t stream) {
    RngState s{seed, stream, 0};
    return DenseMatrix(rows, cols, gaussian(s, rows * cols));
}
}  // namespace

TEST_CASE("matmul: identity") {
    const DenseMatrix b = random_matrix(3, 5, 1, 0);
    CHECK(matmul(DenseMatrix::identity(3), b) == b);
}

TEST_CASE("matmul: hand arithmetic") {
    const DenseMatrix a{{1, 2}, {3, 4}};
    const DenseMatrix b{{0}, {1}};
    const DenseMatrix c = matmul(a, b);
    CHECK(c(0, 0) == 2.0);
    CHECK(c(1, 0) == 4.0);
}

TEST_CASE("matmul: matches scalar dot product oracle") {
    const DenseMatrix a = random_matrix(8, 5, 2, 0);
    const DenseMatrix b = random_matrix(5, 3, 2, 1);
    const DenseMatrix c = matmul(a, b);
    const DenseMatrix ref = oracles::matmul_scalar(a, b);
    for (index_t i = 0; i < 8; ++i)
        for (index_t j = 0; j < 3; ++j)
            CHECK(std::abs(c(i, j) - ref(i, j)) <= 1e-12 * std::max(1.0, std::abs(ref(i, j))));
}

TEST_CASE("matmul: shape mismatch names both shapes") {
    const DenseMatrix a = random_matrix(2, 3, 3, 0);
    const DenseMatrix b = random_matrix(4, 2, 3, 1);
    CHECK_THROWS_WITH(matmul(a, b), Catch::Matchers::ContainsSubstring("2x3") &&
                                        Catch::Matchers::ContainsSubstring("4x2"));
}

TEST_CASE("matmul: associativity on conforming triples") {
    const DenseMatrix a = random_matrix(6, 4, 4, 0);
    const DenseMatrix b = random_matrix(4, 7, 4, 1);
    const DenseMatrix c = random_matrix(7, 3, 4, 2);
    const DenseMatrix left = matmul(matmul(a, b), c);
    const DenseMatrix right = matmul(a, matmul(b, c));
    const double scale = left.max_abs();
    for (index_t i = 0; i < left.rows(); ++i)
        for (index_t j = 0; j < left.cols(); ++j)
            CHECK(std::abs(left(i, j) - right(i, j)) <= 1e-10 * scale);
}

TEST_CASE("frobenius_objective: exact interpolant and zero V") {
    const DenseMatrix i2 = DenseMatrix::identity(2);
    CHECK(frobenius_objective(i2, i2, i2) == 0.0);
    CHECK(frobenius_objective(i2, DenseMatrix(2, 2), i2) == 2.0);
}

TEST_CASE("frobenius_objective: matches elementwise oracle") {
    const DenseMatrix a = random_matrix(10, 4, 5, 0);
    const DenseMatrix v = random_matrix(4, 3, 5, 1);
    const DenseMatrix b = random_matrix(10, 3, 5, 2);
    const double got = frobenius_objective(a, v, b);
    const double ref = oracles::frobenius_objective_scalar(a, v, b);
    CHECK(std::abs(got - ref) <= 1e-12 * ref);
    CHECK_THROWS_AS(frobenius_objective(a, v, random_matrix(9, 3, 5, 3)), error);
}

TEST_CASE("DenseMatrix: rejects non-finite and wrong-size data") {
    CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, std::nan("")}), error);
    CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0}), error);
}
