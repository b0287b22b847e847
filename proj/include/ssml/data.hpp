#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ssml/matrix.hpp"
#include "ssml/random.hpp"

namespace ssml {

/// Sparse multi-label dataset: per-example (index, value) feature pairs with
/// strictly increasing indices, plus a dense binary label matrix.
struct MultiLabelDataset {
    index_t n = 0, p = 0, q = 0;
    std::vector<std::vector<std::pair<index_t, double>>> features;
    DenseMatrix labels;  // n x q, entries in {0,1}
    std::string name;

    DenseMatrix densify() const {
        DenseMatrix x(n, p);
        for (index_t i = 0; i < n; ++i)
            for (const auto& [idx, val] : features[i]) x(i, idx) = val;
        return x;
    }
};

/// Text format, one example per line after an `n p q` header:
///   <labels> <idx:val> <idx:val> ...
/// where <labels> is a comma-separated list of 0-based label indices (empty
/// for a label-free example; such a line starts directly with features).
inline MultiLabelDataset load_sparse_multilabel(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::failf("cannot open dataset file '", path, "'");

    std::string line;
    if (!std::getline(in, line)) detail::failf(path, ":1: missing header");
    MultiLabelDataset ds;
    {
        std::istringstream hs(line);
        long long n = -1, p = -1, q = -1;
        if (!(hs >> n >> p >> q) || n < 1 || p < 1 || q < 1)
            detail::failf(path, ":1: malformed header, expected 'n p q'");
        std::string rest;
        if (hs >> rest) detail::failf(path, ":1: trailing tokens after header");
        ds.n = static_cast<index_t>(n);
        ds.p = static_cast<index_t>(p);
        ds.q = static_cast<index_t>(q);
    }
    ds.labels = DenseMatrix(ds.n, ds.q);
    ds.features.resize(ds.n);
    ds.name = path;

    for (index_t i = 0; i < ds.n; ++i) {
        const index_t line_no = i + 2;
        if (!std::getline(in, line))
            detail::failf(path, ":", line_no, ": expected ", ds.n, " example lines");
        std::istringstream ls(line);
        std::string token;
        bool first = true;
        std::vector<std::pair<index_t, double>> feats;
        while (ls >> token) {
            const auto colon = token.find(':');
            if (first && colon == std::string::npos) {
                // label list
                std::istringstream lab(token);
                std::string part;
                while (std::getline(lab, part, ',')) {
                    std::size_t used = 0;
                    long long v = -1;
                    try {
                        v = std::stoll(part, &used);
                    } catch (const std::exception&) {
                        detail::failf(path, ":", line_no, ": malformed label '", part, "'");
                    }
                    if (used != part.size() || v < 0 ||
                        v >= static_cast<long long>(ds.q))
                        detail::failf(path, ":", line_no, ": label index ", part,
                                      " out of range [0, ", ds.q, ")");
                    ds.labels(i, static_cast<index_t>(v)) = 1.0;
                }
                first = false;
                continue;
            }
            first = false;
            if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
                detail::failf(path, ":", line_no, ": malformed feature '", token, "'");
            long long idx = -1;
            double val = 0.0;
            std::size_t used = 0;
            try {
                idx = std::stoll(token.substr(0, colon), &used);
                if (used != colon) throw error("trailing");
                val = std::stod(token.substr(colon + 1), &used);
                if (used != token.size() - colon - 1) throw error("trailing");
            } catch (const std::exception&) {
                detail::failf(path, ":", line_no, ": malformed feature '", token, "'");
            }
            if (idx < 0 || idx >= static_cast<long long>(ds.p))
                detail::failf(path, ":", line_no, ": feature index ", idx, " out of range [0, ",
                              ds.p, ")");
            if (!std::isfinite(val))
                detail::failf(path, ":", line_no, ": non-finite feature value");
            feats.emplace_back(static_cast<index_t>(idx), val);
        }
        std::sort(feats.begin(), feats.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t t = 1; t < feats.size(); ++t)
            if (feats[t].first == feats[t - 1].first)
                detail::failf(path, ":", line_no, ": duplicate feature index ", feats[t].first);
        ds.features[i] = std::move(feats);
    }
    return ds;
}

inline void save_sparse_multilabel(const MultiLabelDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) detail::failf("cannot write dataset file '", path, "'");
    out << ds.n << ' ' << ds.p << ' ' << ds.q << '\n';
    char buf[64];
    for (index_t i = 0; i < ds.n; ++i) {
        bool first_label = true;
        for (index_t j = 0; j < ds.q; ++j) {
            if (ds.labels(i, j) != 0.0) {
                if (!first_label) out << ',';
                out << j;
                first_label = false;
            }
        }
        for (const auto& [idx, val] : ds.features[i]) {
            std::snprintf(buf, sizeof(buf), "%.17g", val);
            out << ' ' << idx << ':' << buf;
        }
        out << '\n';
    }
    if (!out) detail::failf("write failed for '", path, "'");
}

/// Seeded shuffle, then the first floor(n * test_fraction) shuffled indices
/// become the test set. Both halves keep ascending original order.
inline std::pair<MultiLabelDataset, MultiLabelDataset> train_test_split(
    const MultiLabelDataset& ds, double test_fraction, std::uint64_t seed) {
    require(test_fraction > 0.0 && test_fraction < 1.0,
            "train_test_split: test_fraction must lie in (0, 1)");
    const index_t n_test = static_cast<index_t>(static_cast<double>(ds.n) * test_fraction);
    require(n_test >= 1 && n_test < ds.n, "train_test_split: both parts must be non-empty");

    std::vector<index_t> order(ds.n);
    for (index_t i = 0; i < ds.n; ++i) order[i] = i;
    RngState state{seed, 90, 0};
    for (index_t i = ds.n - 1; i > 0; --i) {
        const index_t j = static_cast<index_t>(next_bounded(state, i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<index_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<index_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    auto take = [&](const std::vector<index_t>& idx, const char* suffix) {
        MultiLabelDataset part;
        part.n = idx.size();
        part.p = ds.p;
        part.q = ds.q;
        part.name = ds.name + suffix;
        part.labels = DenseMatrix(part.n, ds.q);
        part.features.reserve(part.n);
        for (index_t r = 0; r < part.n; ++r) {
            part.features.push_back(ds.features[idx[r]]);
            for (index_t j = 0; j < ds.q; ++j) part.labels(r, j) = ds.labels(idx[r], j);
        }
        return part;
    };
    return {take(train_idx, "#train"), take(test_idx, "#test")};
}

enum class SyntheticKind { planted_linear, smooth_bayes };

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::planted_linear;
    index_t n = 0, p = 0, q = 0;
    double noise_sigma = 0.0;      // planted_linear
    double lipschitz_scale = 1.0;  // smooth_bayes
    std::uint64_t seed = 42;
};

struct PlantedLinearData {
    MultiLabelDataset dataset;
    DenseMatrix w_true;  // p x q
    DenseMatrix scores;  // n x q, pre-threshold (exposed for noiseless recovery checks)
};

/// X with i.i.d. N(0,1) entries, W with i.i.d. N(0, sd = 1/sqrt(p)) entries,
/// scores = X W + noise_sigma * N(0,1); label = [score > 0].
inline PlantedLinearData gen_planted_linear(const SyntheticSpec& spec) {
    require(spec.kind == SyntheticKind::planted_linear, "gen_planted_linear: wrong kind");
    require(spec.n >= 1 && spec.p >= 1 && spec.q >= 1, "gen_planted_linear: dimensions positive");
    require(spec.noise_sigma >= 0.0, "gen_planted_linear: noise_sigma must be >= 0");

    PlantedLinearData out;
    RngState xs{spec.seed, 10, 0};
    DenseMatrix x(spec.n, spec.p, gaussian(xs, spec.n * spec.p));
    RngState ws{spec.seed, 11, 0};
    out.w_true = DenseMatrix(spec.p, spec.q, gaussian(ws, spec.p * spec.q));
    const double sd = 1.0 / std::sqrt(static_cast<double>(spec.p));
    for (index_t i = 0; i < out.w_true.size(); ++i) out.w_true.data()[i] *= sd;

    out.scores = matmul(x, out.w_true);
    if (spec.noise_sigma > 0.0) {
        RngState ns{spec.seed, 12, 0};
        const auto noise = gaussian(ns, spec.n * spec.q);
        for (index_t i = 0; i < out.scores.size(); ++i)
            out.scores.data()[i] += spec.noise_sigma * noise[i];
    }

    MultiLabelDataset& ds = out.dataset;
    ds.n = spec.n;
    ds.p = spec.p;
    ds.q = spec.q;
    ds.name = "planted_linear";
    ds.labels = DenseMatrix(spec.n, spec.q);
    for (index_t i = 0; i < spec.n; ++i)
        for (index_t j = 0; j < spec.q; ++j)
            ds.labels(i, j) = out.scores(i, j) > 0.0 ? 1.0 : 0.0;
    ds.features.resize(spec.n);
    for (index_t i = 0; i < spec.n; ++i) {
        ds.features[i].reserve(spec.p);
        for (index_t j = 0; j < spec.p; ++j) ds.features[i].emplace_back(j, x(i, j));
    }
    return out;
}

struct SmoothBayesData {
    MultiLabelDataset dataset;
    std::vector<double> bayes_errors;  // per label, Monte-Carlo estimate
    DenseMatrix coeff_a;               // q x 2
    std::vector<double> coeff_b;       // q
    double lipschitz_scale = 0.0;
    double lipschitz_bound = 0.0;  // lipschitz_scale * max_i ||a_i||_2 (Euclidean metric)

    /// nu_1^i(x) = P(y_i = 1 | x): clamp(1/2 + scale*(a_i'x + b_i), 0.05, 0.95).
    double nu(index_t label, double x0, double x1) const {
        const double raw =
            0.5 + lipschitz_scale * (coeff_a(label, 0) * x0 + coeff_a(label, 1) * x1 +
                                     coeff_b[label]);
        return std::min(0.95, std::max(0.05, raw));
    }
};

/// x uniform on [0,1]^2; per-label affine conditional probabilities centered
/// at the domain midpoint so nu(center) = 1/2; labels Bernoulli(nu); Bayes
/// errors estimated as the mean of min(nu, 1-nu) over 1e6 fresh points.
inline SmoothBayesData gen_smooth_bayes(const SyntheticSpec& spec) {
    require(spec.kind == SyntheticKind::smooth_bayes, "gen_smooth_bayes: wrong kind");
    require(spec.p == 2, "gen_smooth_bayes: p is fixed to 2");
    require(spec.n >= 1 && spec.q >= 1, "gen_smooth_bayes: dimensions positive");
    require(spec.lipschitz_scale >= 0.0, "gen_smooth_bayes: lipschitz_scale must be >= 0");

    SmoothBayesData out;
    out.lipschitz_scale = spec.lipschitz_scale;
    RngState as{spec.seed, 20, 0};
    out.coeff_a = DenseMatrix(spec.q, 2, gaussian(as, 2 * spec.q));
    out.coeff_b.resize(spec.q);
    for (index_t i = 0; i < spec.q; ++i)
        out.coeff_b[i] = -0.5 * (out.coeff_a(i, 0) + out.coeff_a(i, 1));
    double max_a = 0.0;
    for (index_t i = 0; i < spec.q; ++i)
        max_a = std::max(max_a, std::hypot(out.coeff_a(i, 0), out.coeff_a(i, 1)));
    out.lipschitz_bound = spec.lipschitz_scale * max_a;

    MultiLabelDataset& ds = out.dataset;
    ds.n = spec.n;
    ds.p = 2;
    ds.q = spec.q;
    ds.name = "smooth_bayes";
    ds.labels = DenseMatrix(spec.n, spec.q);
    ds.features.resize(spec.n);
    RngState xs{spec.seed, 21, 0};
    RngState ls{spec.seed, 22, 0};
    for (index_t i = 0; i < spec.n; ++i) {
        const double x0 = next_u01(xs), x1 = next_u01(xs);
        ds.features[i] = {{0, x0}, {1, x1}};
        for (index_t j = 0; j < spec.q; ++j)
            ds.labels(i, j) = next_u01(ls) < out.nu(j, x0, x1) ? 1.0 : 0.0;
    }

    out.bayes_errors.assign(spec.q, 0.0);
    RngState ms{spec.seed, 23, 0};
    const index_t mc = 1000000;
    for (index_t t = 0; t < mc; ++t) {
        const double x0 = next_u01(ms), x1 = next_u01(ms);
        for (index_t j = 0; j < spec.q; ++j) {
            const double nu = out.nu(j, x0, x1);
            out.bayes_errors[j] += std::min(nu, 1.0 - nu);
        }
    }
    for (double& b : out.bayes_errors) b /= static_cast<double>(mc);
    return out;
}

}  // namespace ssml
