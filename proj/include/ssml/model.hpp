#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ssml/lstsq.hpp"
#include "ssml/matrix.hpp"
#include "ssml/sketch.hpp"

namespace ssml {

struct SketchMeta {
    SketchVariant variant;
    index_t m = 0;
    std::uint64_t seed = 0;
};

/// A fitted binary-relevance regressor with its training embedding.
/// Prediction runs kNN over the rows of Z = X_train * V_hat under the
/// Euclidean metric d(x, x') = ||V_hat' x - V_hat' x'||_2.
struct SketchedModel {
    DenseMatrix v_hat;           // p x q
    DenseMatrix train_embedding; // n x q
    DenseMatrix train_labels;    // n x q binary
    index_t k = 1;
    double theta = 0.5;          // per-label vote threshold, in (0, 1]
    std::optional<SketchMeta> sketch_meta;
    double fit_seconds = 0.0;    // exact: solve; sketched: sketch apply + solve
    std::vector<std::string> warnings;

    index_t n_train() const { return train_embedding.rows(); }
    index_t p() const { return v_hat.rows(); }
    index_t q() const { return v_hat.cols(); }
};

namespace detail {
inline void check_fit_shapes(const DenseMatrix& x, const DenseMatrix& y, index_t k) {
    if (x.rows() != y.rows())
        failf("fit: X has ", x.rows(), " rows but Y has ", y.rows());
    if (k < 1 || k > x.rows()) failf("fit: k=", k, " out of range [1, ", x.rows(), "]");
}
}  // namespace detail

inline SketchedModel fit_exact(const DenseMatrix& x, const DenseMatrix& y, index_t k,
                               double theta = 0.5) {
    detail::check_fit_shapes(x, y, k);
    for (double v : y.values())
        if (v != 0.0 && v != 1.0) detail::fail("fit_exact: Y entries must be 0 or 1");
    require(theta > 0.0 && theta <= 1.0, "fit: theta must lie in (0, 1]");
    SketchedModel model;
    const auto t0 = std::chrono::steady_clock::now();
    model.v_hat = least_squares(x, y);
    const auto t1 = std::chrono::steady_clock::now();
    model.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
    model.train_embedding = matmul(x, model.v_hat);
    model.train_labels = y;
    model.k = k;
    model.theta = theta;
    return model;
}

// fit_sketched accepts real-valued Y: theory checks sketch consistent
// real-valued systems, and SY is real after sketching anyway.
inline SketchedModel fit_sketched(const DenseMatrix& x, const DenseMatrix& y,
                                  const SketchOperator& op, index_t k, double theta = 0.5) {
    detail::check_fit_shapes(x, y, k);
    require(theta > 0.0 && theta <= 1.0, "fit: theta must lie in (0, 1]");
    if (op.n != x.rows())
        detail::failf("fit_sketched: operator expects ", op.n, " rows, X has ", x.rows());
    SketchedModel model;
    const auto t0 = std::chrono::steady_clock::now();
    const DenseMatrix sx = apply_sketch(op, x);
    const DenseMatrix sy = apply_sketch(op, y);
    model.v_hat = least_squares(sx, sy);
    const auto t1 = std::chrono::steady_clock::now();
    model.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
    if (op.m < x.cols())
        model.warnings.push_back("sketch size m < p: sketched system may be rank-deficient");
    model.train_embedding = matmul(x, model.v_hat);
    model.train_labels = y;
    model.k = k;
    model.theta = theta;
    model.sketch_meta = SketchMeta{op.variant, op.m, op.seed};
    return model;
}

/// Query embedding Z_q = X_q * V_hat; the rows live in the space where
/// neighbour distances are measured.
inline DenseMatrix embed(const SketchedModel& model, const DenseMatrix& x_query) {
    if (x_query.cols() != model.p())
        detail::failf("embed: query has ", x_query.cols(), " columns, model expects ", model.p());
    return matmul(x_query, model.v_hat);
}

namespace detail {

// k smallest (squared distance, train index) pairs, ascending; ties resolved
// toward the lower index by the lexicographic pair order.
inline void k_nearest(const DenseMatrix& z_train, const double* zq, index_t q, index_t k,
                      std::vector<std::pair<double, index_t>>& heap) {
    heap.clear();
    const index_t n = z_train.rows();
    for (index_t i = 0; i < n; ++i) {
        const double* zi = z_train.row_ptr(i);
        double d = 0.0;
        for (index_t j = 0; j < q; ++j) {
            const double diff = zi[j] - zq[j];
            d += diff * diff;
        }
        const std::pair<double, index_t> cand{d, i};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end());
        }
    }
    std::sort_heap(heap.begin(), heap.end());
}

}  // namespace detail

/// kNN vote in the embedding space. Label i is set iff its positive neighbour
/// count strictly exceeds theta * k. With `nonempty`, an all-zero prediction
/// is replaced by the single highest-count label (lowest index on ties).
inline DenseMatrix predict(const SketchedModel& model, const DenseMatrix& x_query,
                           bool nonempty = false) {
    const index_t n = model.n_train();
    if (model.k > n) detail::failf("predict: k=", model.k, " exceeds training size ", n);
    const DenseMatrix zq = embed(model, x_query);
    const index_t t = x_query.rows(), q = model.q();
    DenseMatrix out(t, q);
    const double bar = model.theta * static_cast<double>(model.k);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(t); ++rr) {
        const index_t r = static_cast<index_t>(rr);
        std::vector<std::pair<double, index_t>> nbrs;
        nbrs.reserve(model.k);
        detail::k_nearest(model.train_embedding, zq.row_ptr(r), q, model.k, nbrs);
        std::vector<index_t> counts(q, 0);
        for (const auto& [dist, idx] : nbrs)
            for (index_t j = 0; j < q; ++j)
                if (model.train_labels(idx, j) != 0.0) ++counts[j];
        bool any = false;
        for (index_t j = 0; j < q; ++j) {
            const bool on = static_cast<double>(counts[j]) > bar;
            out(r, j) = on ? 1.0 : 0.0;
            any = any || on;
        }
        if (nonempty && !any) {
            index_t best = 0;
            for (index_t j = 1; j < q; ++j)
                if (counts[j] > counts[best]) best = j;
            out(r, best) = 1.0;
        }
    }
    return out;
}

/// Nearest neighbour's label row, copied verbatim. Kept as its own scan so it
/// can cross-check predict(k=1).
inline DenseMatrix predict_1nn(const SketchedModel& model, const DenseMatrix& x_query) {
    const index_t n = model.n_train();
    require(n >= 1, "predict_1nn: empty training set");
    const DenseMatrix zq = embed(model, x_query);
    const index_t t = x_query.rows(), q = model.q();
    DenseMatrix out(t, q);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(t); ++rr) {
        const index_t r = static_cast<index_t>(rr);
        const double* zr = zq.row_ptr(r);
        double best = 0.0;
        index_t best_idx = 0;
        for (index_t i = 0; i < n; ++i) {
            const double* zi = model.train_embedding.row_ptr(i);
            double d = 0.0;
            for (index_t j = 0; j < q; ++j) {
                const double diff = zi[j] - zr[j];
                d += diff * diff;
            }
            if (i == 0 || d < best) {
                best = d;
                best_idx = i;
            }
        }
        for (index_t j = 0; j < q; ++j) out(r, j) = model.train_labels(best_idx, j);
    }
    return out;
}

}  // namespace ssml
