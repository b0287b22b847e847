#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they are used to check.

#include <cstdint>
#include <vector>

#include "ssml/matrix.hpp"

namespace oracles {

// Naive O(n^2) Hadamard multiply: H_ij = (-1)^popcount(i & j), 0-based.
inline std::vector<double> hadamard_multiply(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const int sign = __builtin_popcountll(i & j) & 1 ? -1 : 1;
            out[i] += sign * v[j];
        }
    return out;
}

// Entry-by-entry scalar dot product matmul.
inline ssml::DenseMatrix matmul_scalar(const ssml::DenseMatrix& a, const ssml::DenseMatrix& b) {
    ssml::DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

// Elementwise-sum Frobenius objective.
inline double frobenius_objective_scalar(const ssml::DenseMatrix& a, const ssml::DenseMatrix& v,
                                         const ssml::DenseMatrix& b) {
    const ssml::DenseMatrix av = matmul_scalar(a, v);
    double s = 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            const double d = av(i, j) - b(i, j);
            s += d * d;
        }
    return s;
}

// Brute-force k nearest neighbours of one query among the rows of `points`
// (squared Euclidean), ties broken by the lower row index. Returns indices.
inline std::vector<std::size_t> knn_indices(const ssml::DenseMatrix& points,
                                            const std::vector<double>& query, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < points.cols(); ++j) {
            const double diff = points(i, j) - query[j];
            s += diff * diff;
        }
        d[i] = {s, i};
    }
    std::sort(d.begin(), d.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(d[i].second);
    return out;
}

}  // namespace oracles
