#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ssml/matrix.hpp"
#include "ssml/random.hpp"

namespace ssml {

enum class SketchVariant { subgaussian_gaussian, subgaussian_rademacher, walsh_hadamard };

inline std::string to_string(SketchVariant v) {
    switch (v) {
        case SketchVariant::subgaussian_gaussian: return "gauss";
        case SketchVariant::subgaussian_rademacher: return "rademacher";
        case SketchVariant::walsh_hadamard: return "wh";
    }
    return "?";
}

inline SketchVariant sketch_variant_from_string(const std::string& s) {
    if (s == "gauss" || s == "gaussian") return SketchVariant::subgaussian_gaussian;
    if (s == "rademacher") return SketchVariant::subgaussian_rademacher;
    if (s == "wh" || s == "walsh_hadamard") return SketchVariant::walsh_hadamard;
    detail::failf("unknown sketch variant '", s, "'");
}

/// In-place unnormalized Walsh-Hadamard transform: v <- H v with
/// H_ij = (-1)^<bits(i), bits(j)>. Length must be a power of two.
inline void fwht_in_place(double* v, index_t len) {
    require(len >= 1 && (len & (len - 1)) == 0, "fwht: length must be a power of two");
    for (index_t h = 1; h < len; h <<= 1) {
        for (index_t i = 0; i < len; i += h << 1) {
            for (index_t j = i; j < i + h; ++j) {
                const double y = v[j + h];
                v[j + h] = v[j] - y;
                v[j] += y;
            }
        }
    }
}

inline void fwht_in_place(std::vector<double>& v) { fwht_in_place(v.data(), v.size()); }

inline index_t next_pow2(index_t n) {
    index_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// A materialized random sketch S in R^{m x n} with E[S'S] = I.
///
/// Subgaussian variants hold the m x n payload densely (entries i.i.d.
/// N(0,1) or Rademacher, scaled by 1/sqrt(m)). The Walsh-Hadamard variant
/// holds a Rademacher sign diagonal over the padded length n' = 2^ceil(log2 n),
/// m distinct sampled row indices, and the scale sqrt(n'/m)/sqrt(n'); rows are
/// S = sqrt(n'/m) * P * (H/sqrt(n')) * R restricted to the first n inputs.
struct SketchOperator {
    SketchVariant variant;
    index_t m = 0;
    index_t n = 0;
    std::uint64_t seed = 0;

    DenseMatrix dense;                // subgaussian payload (m x n)
    std::vector<double> signs;        // walsh_hadamard: n_padded signs
    std::vector<index_t> sample_rows; // walsh_hadamard: m sorted distinct indices
    index_t n_padded = 0;
    double scale = 0.0;
};

inline SketchOperator build_subgaussian(index_t m, index_t n, SketchVariant dist,
                                        std::uint64_t seed) {
    require(dist == SketchVariant::subgaussian_gaussian ||
                dist == SketchVariant::subgaussian_rademacher,
            "build_subgaussian: dist must be gaussian or rademacher");
    require(m >= 1, "build_subgaussian: m must be positive");
    if (m > n) detail::failf("build_subgaussian: m=", m, " exceeds n=", n);

    SketchOperator op;
    op.variant = dist;
    op.m = m;
    op.n = n;
    op.seed = seed;
    RngState state{seed, 0, 0};
    std::vector<double> entries = (dist == SketchVariant::subgaussian_gaussian)
                                      ? gaussian(state, m * n)
                                      : rademacher(state, m * n);
    const double s = 1.0 / std::sqrt(static_cast<double>(m));
    for (double& e : entries) e *= s;
    op.dense = DenseMatrix(m, n, std::move(entries));
    require(op.dense.max_abs() > 0.0, "build_subgaussian: zero sketch");
    return op;
}

inline SketchOperator build_walsh_hadamard(index_t m, index_t n, std::uint64_t seed) {
    require(m >= 1, "build_walsh_hadamard: m must be positive");
    if (m > n) detail::failf("build_walsh_hadamard: m=", m, " exceeds n=", n);

    SketchOperator op;
    op.variant = SketchVariant::walsh_hadamard;
    op.m = m;
    op.n = n;
    op.seed = seed;
    op.n_padded = next_pow2(n);
    RngState sign_state{seed, 0, 0};
    op.signs = rademacher(sign_state, op.n_padded);
    RngState row_state{seed, 1, 0};
    op.sample_rows = sample_without_replacement(row_state, m, op.n_padded);
    op.scale = std::sqrt(static_cast<double>(op.n_padded) / static_cast<double>(m)) /
               std::sqrt(static_cast<double>(op.n_padded));
    return op;
}

/// S * M. Subgaussian: dense multiply. Walsh-Hadamard: per column, sign-flip,
/// zero-pad, FWHT, gather the sampled rows, scale.
inline DenseMatrix apply_sketch(const SketchOperator& op, const DenseMatrix& mat) {
    if (mat.rows() != op.n)
        detail::failf("apply_sketch: matrix has ", mat.rows(), " rows, operator expects ", op.n);
    if (op.variant != SketchVariant::walsh_hadamard) return matmul(op.dense, mat);

    const index_t c = mat.cols();
    DenseMatrix out(op.m, c);
#pragma omp parallel for schedule(static) if (c > 1)
    for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(c); ++jj) {
        const index_t j = static_cast<index_t>(jj);
        std::vector<double> buf(op.n_padded, 0.0);
        for (index_t i = 0; i < op.n; ++i) buf[i] = op.signs[i] * mat(i, j);
        fwht_in_place(buf);
        for (index_t r = 0; r < op.m; ++r) out(r, j) = op.scale * buf[op.sample_rows[r]];
    }
    out.ensure_finite("apply_sketch");
    return out;
}

/// S as a dense m x n matrix (applies the operator to the identity).
/// Intended for diagnostics and small-scale checks.
inline DenseMatrix materialize(const SketchOperator& op) {
    return apply_sketch(op, DenseMatrix::identity(op.n));
}

}  // namespace ssml
