#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ssml/lstsq.hpp"
#include "ssml/matrix.hpp"
#include "ssml/random.hpp"
#include "ssml/sketch.hpp"

namespace ssml {

enum class WidthKind { gaussian, rademacher, s_gaussian };

inline std::string to_string(WidthKind k) {
    switch (k) {
        case WidthKind::gaussian: return "gaussian";
        case WidthKind::rademacher: return "rademacher";
        case WidthKind::s_gaussian: return "s_gaussian";
    }
    return "?";
}

/// Monte-Carlo width estimate with its standard error.
struct WidthEstimate {
    WidthKind kind;
    double mean = 0.0;
    double std_error = 0.0;
    index_t samples = 0;
};

namespace detail {

inline void check_orthonormal(const DenseMatrix& b) {
    const DenseMatrix btb = matmul(transpose(b), b);
    for (index_t i = 0; i < btb.rows(); ++i)
        for (index_t j = 0; j < btb.cols(); ++j)
            if (std::abs(btb(i, j) - (i == j ? 1.0 : 0.0)) > 1e-8)
                fail("width estimator: basis columns are not orthonormal");
}

inline WidthEstimate summarize(WidthKind kind, const std::vector<double>& values) {
    WidthEstimate est;
    est.kind = kind;
    est.samples = values.size();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var = values.size() > 1 ? var / static_cast<double>(values.size() - 1) : 0.0;
    est.mean = mean;
    est.std_error = std::sqrt(var / static_cast<double>(values.size()));
    return est;
}

}  // namespace detail

/// Gaussian width of range(B) ∩ S^{n-1} for an orthonormal B: the supremum
/// of |<g, z>| over the set equals ||B'g||_2, so the estimate is the mean of
/// that norm over i.i.d. standard normal g. Each sample draws from its own
/// stream, so the reduction order is fixed regardless of parallelism.
inline WidthEstimate gaussian_width_mc(const DenseMatrix& b, index_t samples,
                                       std::uint64_t seed = 42) {
    require(samples >= 1, "gaussian_width_mc: samples must be >= 1");
    detail::check_orthonormal(b);
    const index_t n = b.rows(), r = b.cols();
    std::vector<double> values(samples);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t tt = 0; tt < static_cast<std::ptrdiff_t>(samples); ++tt) {
        RngState state{seed, 100 + static_cast<std::uint64_t>(tt), 0};
        const auto g = gaussian(state, n);
        double norm2 = 0.0;
        for (index_t j = 0; j < r; ++j) {
            double dot = 0.0;
            for (index_t i = 0; i < n; ++i) dot += b(i, j) * g[i];
            norm2 += dot * dot;
        }
        values[static_cast<index_t>(tt)] = std::sqrt(norm2);
    }
    return detail::summarize(WidthKind::gaussian, values);
}

/// Rademacher width of range(B) ∩ S^{n-1}: mean of ||B'w||_2 over sign vectors.
inline WidthEstimate rademacher_width_mc(const DenseMatrix& b, index_t samples,
                                         std::uint64_t seed = 42) {
    require(samples >= 1, "rademacher_width_mc: samples must be >= 1");
    detail::check_orthonormal(b);
    const index_t n = b.rows(), r = b.cols();
    std::vector<double> values(samples);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t tt = 0; tt < static_cast<std::ptrdiff_t>(samples); ++tt) {
        RngState state{seed, 200 + static_cast<std::uint64_t>(tt), 0};
        const auto w = rademacher(state, n);
        double norm2 = 0.0;
        for (index_t j = 0; j < r; ++j) {
            double dot = 0.0;
            for (index_t i = 0; i < n; ++i) dot += b(i, j) * w[i];
            norm2 += dot * dot;
        }
        values[static_cast<index_t>(tt)] = std::sqrt(norm2);
    }
    return detail::summarize(WidthKind::rademacher, values);
}

/// S-Gaussian width of range(B) ∩ S^{n-1}: mean over fresh (g, S) pairs of
/// sup_z |<g, Sz/sqrt(m)>| = ||(SB)'g||_2 / sqrt(m), with g in R^m.
inline WidthEstimate s_gaussian_width_mc(const DenseMatrix& b, SketchVariant variant, index_t m,
                                         index_t samples, std::uint64_t seed = 42) {
    require(samples >= 1, "s_gaussian_width_mc: samples must be >= 1");
    detail::check_orthonormal(b);
    const index_t n = b.rows(), r = b.cols();
    if (m > n) detail::failf("s_gaussian_width_mc: m=", m, " exceeds n=", n);
    std::vector<double> values(samples);
    const double root_m = std::sqrt(static_cast<double>(m));
    for (index_t t = 0; t < samples; ++t) {
        const std::uint64_t op_seed = derive_seed(seed, 2 * t);
        const SketchOperator op = (variant == SketchVariant::walsh_hadamard)
                                      ? build_walsh_hadamard(m, n, op_seed)
                                      : build_subgaussian(m, n, variant, op_seed);
        const DenseMatrix sb = apply_sketch(op, b);  // m x r
        RngState gs{seed, 300 + t, 0};
        const auto g = gaussian(gs, m);
        double norm2 = 0.0;
        for (index_t j = 0; j < r; ++j) {
            double dot = 0.0;
            for (index_t i = 0; i < m; ++i) dot += sb(i, j) * g[i];
            norm2 += dot * dot;
        }
        values[t] = std::sqrt(norm2) / root_m;
    }
    return detail::summarize(WidthKind::s_gaussian, values);
}

/// Subgaussian sketch-size rule: ceil((c1/delta)^2 * width^2).
inline index_t recommend_sketch_size(double width, double delta, double c1) {
    require(delta > 0.0 && delta < 1.0, "recommend_sketch_size: delta must lie in (0,1)");
    require(width > 0.0, "recommend_sketch_size: width must be positive");
    require(c1 > 0.0, "recommend_sketch_size: c1 must be positive");
    const double ratio = c1 / delta;
    return static_cast<index_t>(std::ceil(ratio * ratio * width * width));
}

/// Walsh-Hadamard sketch-size rule: the subgaussian rule applied to the
/// S-Gaussian width times the extra factor (rademacher_width + sqrt(6 log2 n))^2.
inline index_t recommend_sketch_size_wh(double s_gaussian_width, double rademacher_width,
                                        index_t n, double delta, double c1) {
    require(delta > 0.0 && delta < 1.0, "recommend_sketch_size_wh: delta must lie in (0,1)");
    require(s_gaussian_width > 0.0 && rademacher_width >= 0.0,
            "recommend_sketch_size_wh: widths must be positive");
    require(c1 > 0.0 && n >= 2, "recommend_sketch_size_wh: bad arguments");
    const double ratio = c1 / delta;
    const double extra = rademacher_width + std::sqrt(6.0 * std::log2(static_cast<double>(n)));
    return static_cast<index_t>(
        std::ceil(ratio * ratio * s_gaussian_width * s_gaussian_width * extra * extra));
}

/// Empirical delta-optimality record: f* = ||X V* - Y||_F^2 at the exact
/// optimum, g = ||S X V^ - S Y||_F^2 at the sketched optimum.
struct DeltaReport {
    double f_star = 0.0;
    double g_hat = 0.0;
    double delta_emp = 0.0;
    index_t m = 0;
    SketchVariant variant = SketchVariant::subgaussian_gaussian;
    std::uint64_t seed = 0;
    bool zero_residual = false;  // f* ~ 0; delta_emp is meaningless then
};

inline DeltaReport delta_optimality_check(const DenseMatrix& x, const DenseMatrix& y,
                                          const SketchOperator& op) {
    DeltaReport rep;
    rep.m = op.m;
    rep.variant = op.variant;
    rep.seed = op.seed;

    const DenseMatrix v_star = least_squares(x, y);
    rep.f_star = frobenius_objective(x, v_star, y);

    const DenseMatrix sx = apply_sketch(op, x);
    const DenseMatrix sy = apply_sketch(op, y);
    const DenseMatrix v_hat = least_squares(sx, sy);
    rep.g_hat = frobenius_objective(sx, v_hat, sy);

    const double floor = 1e-12 * std::max(1.0, y.frobenius_norm_sq());
    if (rep.f_star <= floor) {
        rep.zero_residual = true;
        rep.delta_emp = 0.0;
    } else {
        rep.delta_emp = std::abs(rep.g_hat - rep.f_star) / rep.f_star;
    }
    return rep;
}

inline bool sandwich_holds(const DeltaReport& rep, double delta) {
    return rep.g_hat >= (1.0 - delta) * rep.f_star && rep.g_hat <= (1.0 + delta) * rep.f_star;
}

struct CalibrationRow {
    index_t m = 0;
    double satisfied_fraction = 0.0;
    double median_delta_emp = 0.0;
};

struct CalibrationResult {
    std::vector<CalibrationRow> rows;
    index_t recommended_m = 0;  // smallest m with satisfied_fraction >= target; 0 if none
};

inline double median_of(std::vector<double> v) {
    require(!v.empty(), "median_of: empty sample");
    std::sort(v.begin(), v.end());
    const index_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Sweeps the sketch-size grid and reports, per m, the fraction of seeds whose
/// sketched objective lands in the (1 +- delta) sandwich, plus the median
/// empirical delta. The recommended m is the smallest one reaching `target`.
inline CalibrationResult calibrate_sketch_size(const DenseMatrix& x, const DenseMatrix& y,
                                               SketchVariant variant,
                                               const std::vector<index_t>& m_grid, double delta,
                                               const std::vector<std::uint64_t>& seeds,
                                               double target = 0.9) {
    require(!m_grid.empty() && !seeds.empty(), "calibrate_sketch_size: empty grid or seeds");
    require(delta > 0.0 && delta < 1.0, "calibrate_sketch_size: delta must lie in (0,1)");
    CalibrationResult out;
    for (index_t m : m_grid) {
        CalibrationRow row;
        row.m = m;
        std::vector<double> deltas;
        index_t hits = 0;
        for (std::uint64_t seed : seeds) {
            const SketchOperator op = (variant == SketchVariant::walsh_hadamard)
                                          ? build_walsh_hadamard(m, x.rows(), seed)
                                          : build_subgaussian(m, x.rows(), variant, seed);
            const DeltaReport rep = delta_optimality_check(x, y, op);
            deltas.push_back(rep.delta_emp);
            if (sandwich_holds(rep, delta)) ++hits;
        }
        row.satisfied_fraction = static_cast<double>(hits) / static_cast<double>(seeds.size());
        row.median_delta_emp = median_of(deltas);
        out.rows.push_back(row);
        if (out.recommended_m == 0 && row.satisfied_fraction >= target) out.recommended_m = m;
    }
    return out;
}

}  // namespace ssml
