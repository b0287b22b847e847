#pragma once

#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

#include "ssml/matrix.hpp"

namespace ssml {

namespace detail {
inline void check_binary_pair(const DenseMatrix& y_true, const DenseMatrix& y_pred,
                              const char* who) {
    if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols())
        failf(who, ": shape mismatch (", y_true.rows(), "x", y_true.cols(), ") vs (",
              y_pred.rows(), "x", y_pred.cols(), ")");
    for (double v : y_true.values())
        if (v != 0.0 && v != 1.0) failf(who, ": non-binary entry in Y_true");
    for (double v : y_pred.values())
        if (v != 0.0 && v != 1.0) failf(who, ": non-binary entry in Y_pred");
}
}  // namespace detail

/// Fraction of (example, label) slots that disagree.
inline double hamming_loss(const DenseMatrix& y_true, const DenseMatrix& y_pred) {
    detail::check_binary_pair(y_true, y_pred, "hamming_loss");
    index_t mismatches = 0;
    for (index_t i = 0; i < y_true.size(); ++i)
        if (y_true.data()[i] != y_pred.data()[i]) ++mismatches;
    return static_cast<double>(mismatches) / static_cast<double>(y_true.size());
}

/// Mean over examples of 2|y ∩ ŷ| / (|y| + |ŷ|). An example where both the
/// truth and the prediction are empty scores `both_empty_score` (default 1:
/// a correct all-negative prediction is not penalized); empty-vs-nonempty
/// scores 0 via the formula itself.
inline double example_f1(const DenseMatrix& y_true, const DenseMatrix& y_pred,
                         double both_empty_score = 1.0) {
    detail::check_binary_pair(y_true, y_pred, "example_f1");
    const index_t n = y_true.rows(), q = y_true.cols();
    double total = 0.0;
    for (index_t i = 0; i < n; ++i) {
        index_t inter = 0, true_count = 0, pred_count = 0;
        for (index_t j = 0; j < q; ++j) {
            const bool t = y_true(i, j) != 0.0;
            const bool p = y_pred(i, j) != 0.0;
            inter += (t && p);
            true_count += t;
            pred_count += p;
        }
        if (true_count + pred_count == 0)
            total += both_empty_score;
        else
            total += 2.0 * static_cast<double>(inter) / static_cast<double>(true_count + pred_count);
    }
    return total / static_cast<double>(n);
}

/// Per-label empirical mismatch frequency; the vector sums to q * hamming_loss.
inline std::vector<double> zero_one_per_label_error(const DenseMatrix& y_true,
                                                    const DenseMatrix& y_pred) {
    detail::check_binary_pair(y_true, y_pred, "zero_one_per_label_error");
    const index_t n = y_true.rows(), q = y_true.cols();
    std::vector<double> out(q, 0.0);
    for (index_t j = 0; j < q; ++j) {
        index_t mismatches = 0;
        for (index_t i = 0; i < n; ++i)
            if (y_true(i, j) != y_pred(i, j)) ++mismatches;
        out[j] = static_cast<double>(mismatches) / static_cast<double>(n);
    }
    return out;
}

/// Runs `thunk` once, returning its value and the elapsed wall-clock seconds
/// on the monotonic clock.
template <typename F>
auto timed(F&& thunk) -> std::pair<decltype(thunk()), double> {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = thunk();
    const auto t1 = std::chrono::steady_clock::now();
    return {std::move(result), std::chrono::duration<double>(t1 - t0).count()};
}

struct MetricsReport {
    double hamming_loss = 0.0;
    double example_f1 = 0.0;
    double fit_seconds = 0.0;
    double predict_seconds = 0.0;
    index_t n_test = 0;
    index_t q = 0;
};

}  // namespace ssml
