#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "ssml/matrix.hpp"

namespace ssml {

enum class CoverMetric { euclidean, embedding };

/// Output of the greedy net construction. Every input point lies strictly
/// within epsilon of some center, and centers are pairwise >= epsilon apart.
struct CoverResult {
    double epsilon = 0.0;
    std::vector<index_t> center_indices;
    CoverMetric metric = CoverMetric::euclidean;
    index_t size() const { return center_indices.size(); }
};

namespace detail {

inline DenseMatrix cover_coordinates(const DenseMatrix& points, CoverMetric metric,
                                     const DenseMatrix* v_hat) {
    if (metric == CoverMetric::euclidean) return points;
    require(v_hat != nullptr, "embedding metric requires V_hat");
    return matmul(points, *v_hat);
}

inline double row_distance(const DenseMatrix& m, index_t a, index_t b) {
    double s = 0.0;
    for (index_t j = 0; j < m.cols(); ++j) {
        const double d = m(a, j) - m(b, j);
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace detail

/// Sequential greedy net: scan points in index order and keep a point as a
/// center iff it is >= epsilon away from every center so far. The result is
/// an epsilon-cover whose size upper-bounds the covering number.
inline CoverResult greedy_epsilon_cover(const DenseMatrix& points, double epsilon,
                                        CoverMetric metric = CoverMetric::euclidean,
                                        const DenseMatrix* v_hat = nullptr) {
    require(points.rows() >= 1, "greedy_epsilon_cover: empty input");
    require(epsilon > 0.0, "greedy_epsilon_cover: epsilon must be positive");
    const DenseMatrix coords = detail::cover_coordinates(points, metric, v_hat);

    CoverResult out;
    out.epsilon = epsilon;
    out.metric = metric;
    for (index_t i = 0; i < coords.rows(); ++i) {
        bool is_center = true;
        for (index_t c : out.center_indices) {
            if (detail::row_distance(coords, i, c) < epsilon) {
                is_center = false;
                break;
            }
        }
        if (is_center) out.center_indices.push_back(i);
    }
    return out;
}

/// Full verification pass: coverage (every point < epsilon from a center)
/// and center separation (pairwise >= epsilon). Throws on violation.
inline void verify_cover(const DenseMatrix& points, const CoverResult& cover,
                         const DenseMatrix* v_hat = nullptr) {
    const DenseMatrix coords = detail::cover_coordinates(points, cover.metric, v_hat);
    for (index_t i = 0; i < coords.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (index_t c : cover.center_indices)
            best = std::min(best, detail::row_distance(coords, i, c));
        if (!(best < cover.epsilon))
            detail::failf("verify_cover: point ", i, " at distance ", best,
                          " from nearest center (epsilon=", cover.epsilon, ")");
    }
    for (index_t a = 0; a < cover.center_indices.size(); ++a)
        for (index_t b = a + 1; b < cover.center_indices.size(); ++b) {
            const double d =
                detail::row_distance(coords, cover.center_indices[a], cover.center_indices[b]);
            if (d < cover.epsilon)
                detail::failf("verify_cover: centers ", cover.center_indices[a], " and ",
                              cover.center_indices[b], " only ", d, " apart");
        }
}

/// Greedy cover sizes along a strictly descending epsilon grid.
inline std::vector<std::pair<double, index_t>> covering_curve(
    const DenseMatrix& points, const std::vector<double>& epsilons,
    CoverMetric metric = CoverMetric::euclidean, const DenseMatrix* v_hat = nullptr) {
    require(!epsilons.empty(), "covering_curve: empty epsilon grid");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        require(epsilons[i] > 0.0, "covering_curve: epsilons must be positive");
        if (i > 0)
            require(epsilons[i] < epsilons[i - 1], "covering_curve: epsilons must descend");
    }
    std::vector<std::pair<double, index_t>> curve;
    curve.reserve(epsilons.size());
    for (double eps : epsilons)
        curve.emplace_back(eps, greedy_epsilon_cover(points, eps, metric, v_hat).size());
    return curve;
}

struct DoublingEstimate {
    double slope = 0.0;     // empirical doubling-dimension proxy
    double residual = 0.0;  // RMS residual of the log-log fit
    bool degenerate = false;  // all sizes equal; slope forced to 0
};

/// Least-squares slope of log2(size) against log2(1/epsilon).
inline DoublingEstimate doubling_dim_estimate(
    const std::vector<std::pair<double, index_t>>& curve) {
    require(curve.size() >= 2, "doubling_dim_estimate: need at least two curve points");

    DoublingEstimate est;
    bool all_equal = true;
    for (const auto& [eps, size] : curve)
        if (size != curve[0].second) all_equal = false;
    if (all_equal) {
        est.degenerate = true;
        return est;
    }

    const double n = static_cast<double>(curve.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [eps, size] : curve) {
        const double x = std::log2(1.0 / eps);
        const double y = std::log2(static_cast<double>(size));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    require(denom > 0.0, "doubling_dim_estimate: degenerate epsilon grid");
    est.slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - est.slope * sx) / n;
    double ss = 0.0;
    for (const auto& [eps, size] : curve) {
        const double x = std::log2(1.0 / eps);
        const double y = std::log2(static_cast<double>(size));
        const double r = y - (est.slope * x + intercept);
        ss += r * r;
    }
    est.residual = std::sqrt(ss / n);
    return est;
}

/// Inputs for the generalization-bound right-hand sides. The diameter of the
/// input space is assumed normalized to 1 (see normalize_diameter).
struct BoundInputs {
    index_t q = 0;
    index_t n = 0;
    double lipschitz = 0.0;     // L, user-supplied assumption
    double v_frobenius = 0.0;   // ||V_hat||_F
    double doubling_dim = 0.0;  // D
    index_t k = 1;
    std::vector<double> bayes_errors;  // length q, entries in [0,1]
};

namespace detail {
inline void check_bound_inputs(const BoundInputs& b) {
    require(b.q >= 1 && b.bayes_errors.size() == b.q, "bound inputs: q must match bayes_errors");
    require(b.n >= 1, "bound inputs: n must be positive");
    require(b.doubling_dim > 0.0, "bound inputs: doubling dimension must be positive");
    require(b.lipschitz >= 0.0 && b.v_frobenius >= 0.0, "bound inputs: negative norm");
    for (double e : b.bayes_errors)
        require(e >= 0.0 && e <= 1.0, "bound inputs: bayes errors must lie in [0,1]");
}
}  // namespace detail

/// 1NN bound: sum_i 2 P(b_i* != y_i) + 3 q L ||V||_F / n^{1/(D+1)}.
inline double bound_rhs_1nn(const BoundInputs& b) {
    detail::check_bound_inputs(b);
    double s = 0.0;
    for (double e : b.bayes_errors) s += 2.0 * e;
    const double rate = std::pow(static_cast<double>(b.n), 1.0 / (b.doubling_dim + 1.0));
    return s + 3.0 * static_cast<double>(b.q) * b.lipschitz * b.v_frobenius / rate;
}

/// kNN bound: sum_i (1 + sqrt(8/k)) P(b_i* != y_i) + q (6 L ||V||_F + k) / n^{1/(D+1)}.
inline double bound_rhs_knn(const BoundInputs& b) {
    detail::check_bound_inputs(b);
    require(b.k >= 1, "bound_rhs_knn: k must be >= 1");
    const double factor = 1.0 + std::sqrt(8.0 / static_cast<double>(b.k));
    double s = 0.0;
    for (double e : b.bayes_errors) s += factor * e;
    const double rate = std::pow(static_cast<double>(b.n), 1.0 / (b.doubling_dim + 1.0));
    return s + static_cast<double>(b.q) *
                   (6.0 * b.lipschitz * b.v_frobenius + static_cast<double>(b.k)) / rate;
}

/// Rescales the point set so its diameter is exactly 1 and returns the
/// original diameter. The bounds above assume this normalization.
inline std::pair<DenseMatrix, double> normalize_diameter(const DenseMatrix& points) {
    require(points.rows() >= 2, "normalize_diameter: need at least two points");
    double diam = 0.0;
    for (index_t a = 0; a < points.rows(); ++a)
        for (index_t b = a + 1; b < points.rows(); ++b)
            diam = std::max(diam, detail::row_distance(points, a, b));
    require(diam > 0.0, "normalize_diameter: all points coincide");
    DenseMatrix scaled = points;
    for (index_t i = 0; i < scaled.size(); ++i) scaled.data()[i] /= diam;
    return {std::move(scaled), diam};
}

}  // namespace ssml
