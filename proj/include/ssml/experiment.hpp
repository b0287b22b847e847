#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ssml/data.hpp"
#include "ssml/geom.hpp"
#include "ssml/metrics.hpp"
#include "ssml/model.hpp"
#include "ssml/theory.hpp"

namespace ssml {

struct ExperimentConfig {
    std::string data_path;                    // file dataset, or
    std::optional<SyntheticSpec> synthetic;   // generated dataset
    std::vector<std::string> methods{"exact", "gauss", "wh"};
    std::vector<index_t> m_grid{64, 128, 256, 512, 1024};
    index_t k = 10;
    double theta = 0.5;
    bool nonempty = false;
    std::vector<std::uint64_t> seeds{42};
    double test_fraction = 0.2;
    double delta = 0.5;
    double c1 = 1.0;
    double lipschitz = 1.0;
    bool lipschitz_given = false;  // explicit --L beats a generator-provided bound
    index_t samples = 1000;        // Monte-Carlo samples for width estimators
    std::vector<double> eps_grid{0.4, 0.2, 0.1};
    index_t max_diag_points = 2000;  // 0 = no cap
    bool parallel_cells = false;
    std::string out_json;
    std::string out_csv;
};

struct ResolvedData {
    MultiLabelDataset ds;
    std::optional<SmoothBayesData> smooth;  // kept when synthetic smooth_bayes
};

inline ResolvedData resolve_dataset(const ExperimentConfig& cfg) {
    ResolvedData out;
    if (!cfg.data_path.empty()) {
        out.ds = load_sparse_multilabel(cfg.data_path);
        return out;
    }
    require(cfg.synthetic.has_value(), "no dataset: pass --data or --synthetic");
    if (cfg.synthetic->kind == SyntheticKind::planted_linear) {
        out.ds = gen_planted_linear(*cfg.synthetic).dataset;
    } else {
        auto smooth = gen_smooth_bayes(*cfg.synthetic);
        out.ds = smooth.dataset;
        out.smooth = std::move(smooth);
    }
    return out;
}

struct ResultRow {
    std::string dataset;
    std::string method;               // exact | gauss | rademacher | wh
    std::optional<index_t> m;         // empty for exact
    index_t k = 0;
    std::uint64_t seed = 0;
    MetricsReport metrics;
    double sketch_build_seconds = 0.0;
    double solve_seconds = 0.0;  // model.fit_seconds (apply + solve)
};

struct FailedCell {
    std::string method;
    std::optional<index_t> m;
    std::uint64_t seed = 0;
    std::string message;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<FailedCell> failures;
    bool timings_comparable = true;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string csv_row(const ResultRow& r) {
    std::ostringstream os;
    char t[32];
    os << r.dataset << ',' << r.method << ',';
    if (r.m) os << *r.m;
    os << ',' << r.k << ',' << r.seed << ',' << format_double(r.metrics.hamming_loss) << ','
       << format_double(r.metrics.example_f1) << ',';
    std::snprintf(t, sizeof(t), "%.6f", r.metrics.fit_seconds);
    os << t << ',';
    std::snprintf(t, sizeof(t), "%.6f", r.metrics.predict_seconds);
    os << t;
    return os.str();
}

inline void append_csv(const std::string& path, const std::string& row, bool with_header) {
    std::ofstream out(path, std::ios::app);
    if (!out) failf("cannot open CSV file '", path, "'");
    if (with_header) out << "dataset,method,m,k,seed,hamming,example_f1,fit_s,predict_s\n";
    out << row << '\n';
}

inline bool csv_needs_header(const std::string& path) {
    std::ifstream in(path);
    return !in || in.peek() == std::ifstream::traits_type::eof();
}

inline std::uint64_t cell_seed(std::uint64_t run_seed, const std::string& method, index_t m) {
    std::uint64_t tag = 0;
    for (char c : method) tag = tag * 131 + static_cast<unsigned char>(c);
    return derive_seed(run_seed, tag * 1000003ULL + m);
}

inline SketchOperator build_operator(const std::string& method, index_t m, index_t n,
                                     std::uint64_t seed) {
    const SketchVariant variant = sketch_variant_from_string(method);
    return variant == SketchVariant::walsh_hadamard
               ? build_walsh_hadamard(m, n, seed)
               : build_subgaussian(m, n, variant, seed);
}

}  // namespace detail

/// One grid cell: split, fit (timed, sketch construction included), predict
/// (timed), score.
inline ResultRow run_cell(const MultiLabelDataset& ds, const ExperimentConfig& cfg,
                          const std::string& method, std::optional<index_t> m,
                          std::uint64_t seed) {
    const auto [train, test] = train_test_split(ds, cfg.test_fraction, seed);
    const DenseMatrix x_train = train.densify();
    const DenseMatrix x_test = test.densify();

    ResultRow row;
    row.dataset = ds.name;
    row.method = method;
    row.m = m;
    row.k = cfg.k;
    row.seed = seed;

    SketchedModel model;
    if (method == "exact") {
        auto [fitted, secs] =
            timed([&] { return fit_exact(x_train, train.labels, cfg.k, cfg.theta); });
        model = std::move(fitted);
        row.metrics.fit_seconds = secs;
        row.solve_seconds = model.fit_seconds;
    } else {
        require(m.has_value(), "sketched method requires m");
        const std::uint64_t op_seed = detail::cell_seed(seed, method, *m);
        // fit_s covers sketch construction + application + solve + embedding
        auto [fitted, secs] = timed([&] {
            const auto t0 = std::chrono::steady_clock::now();
            const SketchOperator op = detail::build_operator(method, *m, x_train.rows(), op_seed);
            const auto t1 = std::chrono::steady_clock::now();
            auto mod = fit_sketched(x_train, train.labels, op, cfg.k, cfg.theta);
            return std::pair(std::move(mod), std::chrono::duration<double>(t1 - t0).count());
        });
        model = std::move(fitted.first);
        row.sketch_build_seconds = fitted.second;
        row.metrics.fit_seconds = secs;
        row.solve_seconds = model.fit_seconds;
    }

    auto [pred, psecs] = timed([&] { return predict(model, x_test, cfg.nonempty); });
    row.metrics.predict_seconds = psecs;
    row.metrics.hamming_loss = hamming_loss(test.labels, pred);
    row.metrics.example_f1 = example_f1(test.labels, pred);
    row.metrics.n_test = test.n;
    row.metrics.q = ds.q;
    return row;
}

/// The method x m x seed grid. Cells run sequentially (timing fidelity) unless
/// parallel_cells is set, in which case timings are flagged non-comparable and
/// CSV rows are written after the join, in grid order.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    require(!cfg.methods.empty(), "run_experiment: methods must be non-empty");
    const ResolvedData data = resolve_dataset(cfg);
    bool any_sketched = false;
    for (const auto& method : cfg.methods) any_sketched = any_sketched || method != "exact";
    if (any_sketched)
        for (index_t m : cfg.m_grid)
            require(m <= data.ds.n, "run_experiment: m_grid entry exceeds dataset size");

    struct Cell {
        std::string method;
        std::optional<index_t> m;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (std::uint64_t seed : cfg.seeds)
        for (const auto& method : cfg.methods) {
            if (method == "exact") {
                cells.push_back({method, std::nullopt, seed});
            } else {
                for (index_t m : cfg.m_grid) cells.push_back({method, m, seed});
            }
        }

    ExperimentResult result;
    result.timings_comparable = !cfg.parallel_cells;
    const bool csv_enabled = !cfg.out_csv.empty();
    bool need_header = csv_enabled && detail::csv_needs_header(cfg.out_csv);

    auto run_one = [&](const Cell& cell) -> std::variant<ResultRow, FailedCell> {
        try {
            return run_cell(data.ds, cfg, cell.method, cell.m, cell.seed);
        } catch (const std::exception& e) {
            return FailedCell{cell.method, cell.m, cell.seed, e.what()};
        }
    };

    if (!cfg.parallel_cells) {
        for (const Cell& cell : cells) {
            auto outcome = run_one(cell);
            if (std::holds_alternative<ResultRow>(outcome)) {
                auto& row = std::get<ResultRow>(outcome);
                if (csv_enabled) {
                    detail::append_csv(cfg.out_csv, detail::csv_row(row), need_header);
                    need_header = false;
                }
                result.rows.push_back(std::move(row));
            } else {
                result.failures.push_back(std::get<FailedCell>(outcome));
            }
        }
    } else {
        std::vector<std::future<std::variant<ResultRow, FailedCell>>> futures;
        futures.reserve(cells.size());
        for (const Cell& cell : cells)
            futures.push_back(std::async(std::launch::async, run_one, cell));
        for (auto& f : futures) {
            auto outcome = f.get();
            if (std::holds_alternative<ResultRow>(outcome)) {
                auto& row = std::get<ResultRow>(outcome);
                if (csv_enabled) {
                    detail::append_csv(cfg.out_csv, detail::csv_row(row), need_header);
                    need_header = false;
                }
                result.rows.push_back(std::move(row));
            } else {
                result.failures.push_back(std::get<FailedCell>(outcome));
            }
        }
    }
    return result;
}

inline nlohmann::ordered_json to_json(const ExperimentResult& result) {
    nlohmann::ordered_json j;
    j["timings_comparable"] = result.timings_comparable;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : result.rows) {
        nlohmann::ordered_json row;
        row["dataset"] = r.dataset;
        row["method"] = r.method;
        if (r.m)
            row["m"] = *r.m;
        else
            row["m"] = nullptr;
        row["k"] = r.k;
        row["seed"] = r.seed;
        row["hamming"] = r.metrics.hamming_loss;
        row["example_f1"] = r.metrics.example_f1;
        row["fit_s"] = r.metrics.fit_seconds;
        row["predict_s"] = r.metrics.predict_seconds;
        row["sketch_build_s"] = r.sketch_build_seconds;
        row["solve_s"] = r.solve_seconds;
        row["n_test"] = r.metrics.n_test;
        j["rows"].push_back(row);
    }
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : result.failures) {
        nlohmann::ordered_json row;
        row["method"] = f.method;
        if (f.m)
            row["m"] = *f.m;
        else
            row["m"] = nullptr;
        row["seed"] = f.seed;
        row["error"] = f.message;
        j["failures"].push_back(row);
    }
    return j;
}

struct DeltaSweepResult {
    std::vector<DeltaReport> reports;
    std::vector<bool> sandwich_ok;  // aligned with reports, at cfg.delta
    std::vector<CalibrationRow> per_m;
    double delta = 0.5;
};

/// delta_optimality_check over the m grid x seeds, for each sketched method.
inline DeltaSweepResult run_delta_sweep(const ExperimentConfig& cfg) {
    const ResolvedData data = resolve_dataset(cfg);
    const DenseMatrix x = data.ds.densify();
    const DenseMatrix& y = data.ds.labels;

    std::vector<std::string> methods;
    for (const auto& m : cfg.methods)
        if (m != "exact") methods.push_back(m);
    if (methods.empty()) methods.push_back("gauss");

    DeltaSweepResult out;
    out.delta = cfg.delta;
    for (index_t m : cfg.m_grid) {
        require(m <= data.ds.n, "run_delta_sweep: m exceeds dataset size");
        std::vector<double> deltas;
        index_t hits = 0, count = 0;
        for (const auto& method : methods) {
            for (std::uint64_t seed : cfg.seeds) {
                const std::uint64_t op_seed = detail::cell_seed(seed, method, m);
                const SketchOperator op = detail::build_operator(method, m, data.ds.n, op_seed);
                DeltaReport rep = delta_optimality_check(x, y, op);
                const bool ok = sandwich_holds(rep, cfg.delta);
                out.reports.push_back(rep);
                out.sandwich_ok.push_back(ok);
                if (!rep.zero_residual) deltas.push_back(rep.delta_emp);
                hits += ok;
                ++count;
            }
        }
        CalibrationRow row;
        row.m = m;
        row.satisfied_fraction = count ? static_cast<double>(hits) / count : 0.0;
        row.median_delta_emp = deltas.empty() ? 0.0 : median_of(deltas);
        out.per_m.push_back(row);
    }
    return out;
}

inline nlohmann::ordered_json to_json(const DeltaSweepResult& result) {
    nlohmann::ordered_json j;
    j["delta"] = result.delta;
    j["reports"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        const auto& r = result.reports[i];
        nlohmann::ordered_json row;
        row["m"] = r.m;
        row["variant"] = to_string(r.variant);
        row["seed"] = r.seed;
        row["f_star"] = r.f_star;
        row["g_hat"] = r.g_hat;
        row["delta_emp"] = r.delta_emp;
        row["zero_residual"] = r.zero_residual;
        row["sandwich_ok"] = static_cast<bool>(result.sandwich_ok[i]);
        j["reports"].push_back(row);
    }
    j["per_m"] = nlohmann::ordered_json::array();
    for (const auto& row : result.per_m) {
        j["per_m"].push_back({{"m", row.m},
                              {"satisfied_fraction", row.satisfied_fraction},
                              {"median_delta_emp", row.median_delta_emp}});
    }
    return j;
}

struct WidthsResult {
    WidthEstimate gaussian;
    WidthEstimate rademacher;
    std::vector<std::pair<index_t, WidthEstimate>> s_gaussian;  // per grid m
    index_t basis_rank = 0;
    std::vector<nlohmann::ordered_json> recommendations;
};

/// Orthonormal basis of range(X), the three width estimators, and sketch-size
/// recommendations over a small delta list.
inline WidthsResult run_widths(const ExperimentConfig& cfg) {
    const ResolvedData data = resolve_dataset(cfg);
    const DenseMatrix x = data.ds.densify();
    const DenseMatrix basis = orthonormal_basis(x);
    const std::uint64_t seed = cfg.seeds.empty() ? 42 : cfg.seeds.front();

    WidthsResult out;
    out.basis_rank = basis.cols();
    out.gaussian = gaussian_width_mc(basis, cfg.samples, seed);
    out.rademacher = rademacher_width_mc(basis, cfg.samples, derive_seed(seed, 1));

    SketchVariant variant = SketchVariant::subgaussian_gaussian;
    for (const auto& m : cfg.methods)
        if (m != "exact") {
            variant = sketch_variant_from_string(m);
            break;
        }
    for (index_t m : cfg.m_grid) {
        if (m > data.ds.n) continue;
        out.s_gaussian.emplace_back(
            m, s_gaussian_width_mc(basis, variant, m, cfg.samples, derive_seed(seed, 2 + m)));
    }

    std::vector<double> deltas{0.1, 0.25, 0.5};
    if (std::find(deltas.begin(), deltas.end(), cfg.delta) == deltas.end())
        deltas.push_back(cfg.delta);
    for (double d : deltas) {
        nlohmann::ordered_json rec;
        rec["delta"] = d;
        rec["m_subgaussian"] = recommend_sketch_size(out.gaussian.mean, d, cfg.c1);
        if (!out.s_gaussian.empty() && data.ds.n >= 2) {
            rec["m_walsh_hadamard"] = recommend_sketch_size_wh(
                out.s_gaussian.front().second.mean, out.rademacher.mean, data.ds.n, d, cfg.c1);
        }
        out.recommendations.push_back(rec);
    }
    return out;
}

inline nlohmann::ordered_json to_json(const WidthsResult& r) {
    auto width_json = [](const WidthEstimate& w) {
        return nlohmann::ordered_json{{"kind", to_string(w.kind)},
                                      {"mean", w.mean},
                                      {"std_error", w.std_error},
                                      {"samples", w.samples}};
    };
    nlohmann::ordered_json j;
    j["basis_rank"] = r.basis_rank;
    j["widths"] = nlohmann::ordered_json::array({width_json(r.gaussian), width_json(r.rademacher)});
    j["s_gaussian"] = nlohmann::ordered_json::array();
    for (const auto& [m, est] : r.s_gaussian) {
        auto e = width_json(est);
        e["m"] = m;
        j["s_gaussian"].push_back(e);
    }
    j["recommendations"] = r.recommendations;
    return j;
}

struct DiagnoseResult {
    double diameter = 0.0;
    std::vector<std::pair<double, index_t>> euclidean_curve;
    std::vector<std::pair<double, index_t>> embedding_curve;
    DoublingEstimate doubling;  // from the embedding curve (the bound's metric)
    DoublingEstimate doubling_euclidean;
    double bound_1nn = 0.0;
    double bound_knn = 0.0;
    BoundInputs inputs;
    std::vector<std::string> notes;
};

/// Covering-number curves (euclidean and embedding metric), the doubling
/// proxy, and the generalization-bound right-hand sides. Points are rescaled
/// to diameter 1 before covering; the scale is reported.
inline DiagnoseResult run_diagnose(const ExperimentConfig& cfg) {
    const ResolvedData data = resolve_dataset(cfg);
    DenseMatrix x = data.ds.densify();
    DenseMatrix y = data.ds.labels;

    DiagnoseResult out;
    if (cfg.max_diag_points > 0 && x.rows() > cfg.max_diag_points) {
        // deterministic thinning: evenly strided subsample
        const index_t keep = cfg.max_diag_points;
        DenseMatrix xs(keep, x.cols());
        DenseMatrix ys(keep, y.cols());
        for (index_t i = 0; i < keep; ++i) {
            const index_t src = i * x.rows() / keep;
            for (index_t j = 0; j < x.cols(); ++j) xs(i, j) = x(src, j);
            for (index_t j = 0; j < y.cols(); ++j) ys(i, j) = y(src, j);
        }
        x = std::move(xs);
        y = std::move(ys);
        out.notes.push_back("points thinned to " + std::to_string(keep) + " for diagnostics");
    }

    auto [scaled, diam] = normalize_diameter(x);
    out.diameter = diam;

    const SketchedModel model = fit_exact(scaled, y, std::min<index_t>(cfg.k, scaled.rows()),
                                          cfg.theta);
    out.euclidean_curve = covering_curve(scaled, cfg.eps_grid, CoverMetric::euclidean);
    out.embedding_curve =
        covering_curve(scaled, cfg.eps_grid, CoverMetric::embedding, &model.v_hat);
    out.doubling_euclidean = doubling_dim_estimate(out.euclidean_curve);
    out.doubling = doubling_dim_estimate(out.embedding_curve);

    BoundInputs b;
    b.q = data.ds.q;
    b.n = data.ds.n;
    if (data.smooth && !cfg.lipschitz_given) {
        b.lipschitz = data.smooth->lipschitz_bound;
        out.notes.push_back("lipschitz constant taken from the smooth_bayes generator");
    } else {
        b.lipschitz = cfg.lipschitz;
    }
    b.v_frobenius = model.v_hat.frobenius_norm();
    b.doubling_dim = out.doubling.degenerate ? 1.0 : std::max(out.doubling.slope, 0.1);
    b.k = cfg.k;
    if (data.smooth) {
        b.bayes_errors = data.smooth->bayes_errors;
    } else {
        b.bayes_errors.assign(data.ds.q, 0.0);
        out.notes.push_back("bayes errors unknown for file datasets; using zeros");
    }
    out.inputs = b;
    out.bound_1nn = bound_rhs_1nn(b);
    out.bound_knn = bound_rhs_knn(b);
    return out;
}

inline nlohmann::ordered_json to_json(const DiagnoseResult& r) {
    auto curve_json = [](const std::vector<std::pair<double, index_t>>& curve) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& [eps, size] : curve)
            arr.push_back({{"epsilon", eps}, {"size", size}});
        return arr;
    };
    nlohmann::ordered_json j;
    j["diameter"] = r.diameter;
    j["euclidean_curve"] = curve_json(r.euclidean_curve);
    j["embedding_curve"] = curve_json(r.embedding_curve);
    j["doubling_dim_embedding"] = {{"slope", r.doubling.slope},
                                   {"residual", r.doubling.residual},
                                   {"degenerate", r.doubling.degenerate}};
    j["doubling_dim_euclidean"] = {{"slope", r.doubling_euclidean.slope},
                                   {"residual", r.doubling_euclidean.residual},
                                   {"degenerate", r.doubling_euclidean.degenerate}};
    j["bound_rhs_1nn"] = r.bound_1nn;
    j["bound_rhs_knn"] = r.bound_knn;
    j["inputs"] = {{"q", r.inputs.q},
                   {"n", r.inputs.n},
                   {"L", r.inputs.lipschitz},
                   {"v_frobenius", r.inputs.v_frobenius},
                   {"doubling_dim", r.inputs.doubling_dim},
                   {"k", r.inputs.k},
                   {"bayes_errors", r.inputs.bayes_errors}};
    j["notes"] = r.notes;
    return j;
}

inline void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) detail::failf("cannot write JSON file '", path, "'");
    out << j.dump(2) << '\n';
}

}  // namespace ssml
