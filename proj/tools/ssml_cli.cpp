// Command-line front end: train/eval single models, sweep the experiment
// grid, and run the theory and covering diagnostics.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssml/ssml.hpp"

namespace {

using ssml::ExperimentConfig;
using ssml::index_t;

struct CliOptions {
    ExperimentConfig cfg;
    std::string synthetic_kind;  // "", "planted", "smooth"
    index_t syn_n = 1024, syn_p = 16, syn_q = 4;
    double syn_noise = 0.5;
    double syn_lipschitz = 1.0;
    std::uint64_t seed = 42;
    std::optional<index_t> single_m;
    std::string method = "exact";
    std::string out_model;
    std::string model_path;
    std::string train_path;
    std::string out_path;  // gen output
    bool seeds_given = false;
};

void finalize_synthetic(CliOptions& opt) {
    if (opt.synthetic_kind.empty()) return;
    ssml::SyntheticSpec spec;
    spec.n = opt.syn_n;
    spec.q = opt.syn_q;
    spec.seed = opt.seed;
    if (opt.synthetic_kind == "planted") {
        spec.kind = ssml::SyntheticKind::planted_linear;
        spec.p = opt.syn_p;
        spec.noise_sigma = opt.syn_noise;
    } else if (opt.synthetic_kind == "smooth") {
        spec.kind = ssml::SyntheticKind::smooth_bayes;
        spec.p = 2;
        spec.lipschitz_scale = opt.syn_lipschitz;
    } else {
        throw CLI::ValidationError("--synthetic must be 'planted' or 'smooth'");
    }
    opt.cfg.synthetic = spec;
}

// The JSON config file mirrors the long flag names. It is applied before
// parsing, so explicit flags override file values.
void apply_config_file(const std::string& path, CliOptions& opt) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw CLI::ValidationError(std::string("config file: ") + e.what());
    }
    auto as_indices = [](const nlohmann::json& v) {
        std::vector<index_t> out;
        for (const auto& x : v) out.push_back(x.get<index_t>());
        return out;
    };
    for (const auto& [key, v] : j.items()) {
        if (key == "data") opt.cfg.data_path = v.get<std::string>();
        else if (key == "synthetic") opt.synthetic_kind = v.get<std::string>();
        else if (key == "n") opt.syn_n = v.get<index_t>();
        else if (key == "p") opt.syn_p = v.get<index_t>();
        else if (key == "q") opt.syn_q = v.get<index_t>();
        else if (key == "noise") opt.syn_noise = v.get<double>();
        else if (key == "lipschitz-scale") opt.syn_lipschitz = v.get<double>();
        else if (key == "seed") opt.seed = v.get<std::uint64_t>();
        else if (key == "seeds") {
            opt.cfg.seeds.clear();
            for (const auto& s : v) opt.cfg.seeds.push_back(s.get<std::uint64_t>());
            opt.seeds_given = true;
        } else if (key == "method") {
            if (v.is_array()) {
                opt.cfg.methods.clear();
                for (const auto& s : v) opt.cfg.methods.push_back(s.get<std::string>());
            } else {
                opt.method = v.get<std::string>();
                opt.cfg.methods = {opt.method};
            }
        } else if (key == "m") opt.single_m = v.get<index_t>();
        else if (key == "m-grid") opt.cfg.m_grid = as_indices(v);
        else if (key == "k") opt.cfg.k = v.get<index_t>();
        else if (key == "theta") opt.cfg.theta = v.get<double>();
        else if (key == "nonempty") opt.cfg.nonempty = v.get<bool>();
        else if (key == "test-fraction") opt.cfg.test_fraction = v.get<double>();
        else if (key == "delta") opt.cfg.delta = v.get<double>();
        else if (key == "c1") opt.cfg.c1 = v.get<double>();
        else if (key == "L") {
            opt.cfg.lipschitz = v.get<double>();
            opt.cfg.lipschitz_given = true;
        } else if (key == "samples") opt.cfg.samples = v.get<index_t>();
        else if (key == "eps-grid") {
            opt.cfg.eps_grid.clear();
            for (const auto& x : v) opt.cfg.eps_grid.push_back(x.get<double>());
        } else if (key == "max-points") opt.cfg.max_diag_points = v.get<index_t>();
        else if (key == "parallel-cells") opt.cfg.parallel_cells = v.get<bool>();
        else if (key == "out-json") opt.cfg.out_json = v.get<std::string>();
        else if (key == "out-csv") opt.cfg.out_csv = v.get<std::string>();
        else if (key == "out-model") opt.out_model = v.get<std::string>();
        else if (key == "model") opt.model_path = v.get<std::string>();
        else if (key == "train") opt.train_path = v.get<std::string>();
        else if (key == "out") opt.out_path = v.get<std::string>();
        else throw CLI::ValidationError("config file: unknown key '" + key + "'");
    }
}

ssml::ResolvedData resolve(CliOptions& opt) {
    finalize_synthetic(opt);
    return ssml::resolve_dataset(opt.cfg);
}

void emit(const nlohmann::ordered_json& j, const std::string& json_path) {
    if (!json_path.empty())
        ssml::write_json(j, json_path);
    else
        std::cout << j.dump(2) << '\n';
}

ssml::SketchedModel fit_with_method(const CliOptions& opt, const ssml::DenseMatrix& x,
                                    const ssml::DenseMatrix& y) {
    if (opt.method == "exact") return ssml::fit_exact(x, y, opt.cfg.k, opt.cfg.theta);
    if (!opt.single_m) throw CLI::ValidationError("sketched method requires --m");
    const auto variant = ssml::sketch_variant_from_string(opt.method);
    const auto op = variant == ssml::SketchVariant::walsh_hadamard
                        ? ssml::build_walsh_hadamard(*opt.single_m, x.rows(), opt.seed)
                        : ssml::build_subgaussian(*opt.single_m, x.rows(), variant, opt.seed);
    return ssml::fit_sketched(x, y, op, opt.cfg.k, opt.cfg.theta);
}

nlohmann::ordered_json metrics_json(const ssml::MetricsReport& m, const std::string& dataset,
                                    const std::string& method) {
    return {{"dataset", dataset},        {"method", method},
            {"hamming", m.hamming_loss}, {"example_f1", m.example_f1},
            {"fit_s", m.fit_seconds},    {"predict_s", m.predict_seconds},
            {"n_test", m.n_test},        {"q", m.q}};
}

int cmd_train(CliOptions& opt) {
    auto data = resolve(opt);
    ssml::MultiLabelDataset train = data.ds;
    std::optional<ssml::MultiLabelDataset> test;
    if (opt.cfg.test_fraction > 0.0 && opt.cfg.test_fraction < 1.0) {
        auto [tr, te] = ssml::train_test_split(data.ds, opt.cfg.test_fraction, opt.seed);
        train = std::move(tr);
        test = std::move(te);
    }
    const ssml::DenseMatrix x = train.densify();
    auto [model, fit_s] = ssml::timed([&] { return fit_with_method(opt, x, train.labels); });

    nlohmann::ordered_json j;
    j["dataset"] = data.ds.name;
    j["method"] = opt.method;
    j["n_train"] = train.n;
    j["fit_s"] = fit_s;
    j["solve_s"] = model.fit_seconds;
    j["warnings"] = model.warnings;
    if (!opt.out_model.empty()) {
        ssml::save_model(model, opt.out_model);
        j["model_file"] = opt.out_model;
    }
    if (test) {
        const ssml::DenseMatrix xt = test->densify();
        auto [pred, predict_s] = ssml::timed([&] { return predict(model, xt, opt.cfg.nonempty); });
        ssml::MetricsReport rep;
        rep.hamming_loss = ssml::hamming_loss(test->labels, pred);
        rep.example_f1 = ssml::example_f1(test->labels, pred);
        rep.fit_seconds = fit_s;
        rep.predict_seconds = predict_s;
        rep.n_test = test->n;
        rep.q = test->q;
        j["metrics"] = metrics_json(rep, data.ds.name, opt.method);
    }
    emit(j, opt.cfg.out_json);
    return 0;
}

int cmd_eval(CliOptions& opt) {
    if (opt.model_path.empty() || opt.train_path.empty())
        throw CLI::ValidationError("eval requires --model and --train");
    const ssml::ModelFile mf = ssml::load_model(opt.model_path);
    const auto train = ssml::load_sparse_multilabel(opt.train_path);
    const auto model = ssml::attach_training(mf, train.densify(), train.labels);

    auto data = resolve(opt);
    const ssml::DenseMatrix xt = data.ds.densify();
    auto [pred, predict_s] = ssml::timed([&] { return predict(model, xt, opt.cfg.nonempty); });
    ssml::MetricsReport rep;
    rep.hamming_loss = ssml::hamming_loss(data.ds.labels, pred);
    rep.example_f1 = ssml::example_f1(data.ds.labels, pred);
    rep.fit_seconds = mf.fit_seconds;
    rep.predict_seconds = predict_s;
    rep.n_test = data.ds.n;
    rep.q = data.ds.q;
    emit(metrics_json(rep, data.ds.name, "model:" + opt.model_path), opt.cfg.out_json);
    return 0;
}

int cmd_sweep(CliOptions& opt) {
    finalize_synthetic(opt);
    const auto result = ssml::run_experiment(opt.cfg);
    emit(ssml::to_json(result), opt.cfg.out_json);
    return result.failures.empty() ? 0 : 2;
}

int cmd_delta_check(CliOptions& opt) {
    finalize_synthetic(opt);
    const auto result = ssml::run_delta_sweep(opt.cfg);
    emit(ssml::to_json(result), opt.cfg.out_json);
    return 0;
}

int cmd_widths(CliOptions& opt) {
    finalize_synthetic(opt);
    const auto result = ssml::run_widths(opt.cfg);
    emit(ssml::to_json(result), opt.cfg.out_json);
    return 0;
}

int cmd_diagnose(CliOptions& opt) {
    finalize_synthetic(opt);
    const auto result = ssml::run_diagnose(opt.cfg);
    emit(ssml::to_json(result), opt.cfg.out_json);
    return 0;
}

int cmd_gen(CliOptions& opt) {
    if (opt.out_path.empty()) throw CLI::ValidationError("gen requires --out");
    finalize_synthetic(opt);
    if (!opt.cfg.synthetic)
        throw CLI::ValidationError("gen requires --synthetic planted|smooth");
    const auto data = ssml::resolve_dataset(opt.cfg);
    ssml::save_sparse_multilabel(data.ds, opt.out_path);
    nlohmann::ordered_json j;
    j["written"] = opt.out_path;
    j["n"] = data.ds.n;
    j["p"] = data.ds.p;
    j["q"] = data.ds.q;
    if (data.smooth) {
        j["bayes_errors"] = data.smooth->bayes_errors;
        j["lipschitz_bound"] = data.smooth->lipschitz_bound;
    }
    emit(j, opt.cfg.out_json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sketch-and-solve multi-label learning"};
    app.require_subcommand(1);

    CliOptions opt;

    // applied first so explicit flags override file values
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            try {
                apply_config_file(args[i + 1], opt);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "error: %s\n", e.what());
                return 1;
            }
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
    }

    auto add_common = [&](CLI::App* sub, bool method_list) {
        sub->add_option("--config", "JSON config file; flags override it")->expected(1);
        sub->add_option("--data", opt.cfg.data_path, "dataset file (see README for the format)");
        sub->add_option("--synthetic", opt.synthetic_kind, "synthetic dataset: planted | smooth");
        sub->add_option("--n", opt.syn_n, "synthetic example count");
        sub->add_option("--p", opt.syn_p, "synthetic feature count (smooth is fixed to p=2)");
        sub->add_option("--q", opt.syn_q, "synthetic label count");
        sub->add_option("--noise", opt.syn_noise, "planted_linear noise sigma");
        sub->add_option("--lipschitz-scale", opt.syn_lipschitz, "smooth_bayes slope scale");
        sub->add_option("--seed", opt.seed, "run seed (also seeds synthetic generators)");
        sub->add_option("--seeds", opt.cfg.seeds, "explicit seed list for grid runs")
            ->each([&](const std::string&) { opt.seeds_given = true; });
        sub->add_option("--test-fraction", opt.cfg.test_fraction, "held-out fraction");
        sub->add_option("--m-grid", opt.cfg.m_grid, "sketch-size grid");
        sub->add_option("--k", opt.cfg.k, "kNN neighbour count");
        sub->add_option("--theta", opt.cfg.theta, "per-label vote threshold in (0,1]");
        sub->add_flag("--nonempty", opt.cfg.nonempty,
                      "force at least one positive label per example");
        sub->add_option("--delta", opt.cfg.delta, "target delta for sandwich checks");
        sub->add_option("--c1", opt.cfg.c1, "universal-constant stand-in for sizing rules");
        sub->add_option("--L", opt.cfg.lipschitz, "Lipschitz constant assumption for bounds")
            ->each([&](const std::string&) { opt.cfg.lipschitz_given = true; });
        sub->add_option("--samples", opt.cfg.samples, "Monte-Carlo samples for width estimators");
        sub->add_option("--eps-grid", opt.cfg.eps_grid, "descending epsilon grid for covers");
        sub->add_option("--max-points", opt.cfg.max_diag_points,
                        "cap on points used by diagnose (0 = all)");
        sub->add_flag("--parallel-cells", opt.cfg.parallel_cells,
                      "run grid cells concurrently (timings become non-comparable)");
        sub->add_option("--out-json", opt.cfg.out_json, "write the JSON report here");
        sub->add_option("--out-csv", opt.cfg.out_csv, "append CSV rows here");
        if (method_list)
            sub->add_option("--method", opt.cfg.methods,
                            "methods: exact | gauss | rademacher | wh (repeatable)");
        else
            sub->add_option("--method", opt.method, "exact | gauss | rademacher | wh");
    };

    auto* train = app.add_subcommand("train", "fit one model and optionally save it");
    add_common(train, false);
    train->add_option("--m", opt.single_m, "sketch size for sketched methods");
    train->add_option("--out-model", opt.out_model, "write the fitted model here (JSON)");

    auto* eval = app.add_subcommand("eval", "evaluate a saved model on a dataset");
    add_common(eval, false);
    eval->add_option("--model", opt.model_path, "model file from train --out-model");
    eval->add_option("--train", opt.train_path, "the original training dataset file");

    auto* sweep = app.add_subcommand("sweep", "method x sketch-size x seed experiment grid");
    add_common(sweep, true);

    auto* delta = app.add_subcommand("delta-check", "empirical delta-optimality sweep");
    add_common(delta, true);

    auto* widths = app.add_subcommand("widths", "Monte-Carlo width estimators and size rules");
    add_common(widths, true);

    auto* diagnose = app.add_subcommand("diagnose", "covering curves and bound evaluators");
    add_common(diagnose, true);

    auto* gen = app.add_subcommand("gen", "write a synthetic dataset to a file");
    add_common(gen, false);
    gen->add_option("--out", opt.out_path, "output dataset path");

    try {
        std::vector<const char*> cargs;
        cargs.push_back(argv[0]);
        for (const auto& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (!opt.seeds_given) opt.cfg.seeds = {opt.seed};

    try {
        if (*train) return cmd_train(opt);
        if (*eval) return cmd_eval(opt);
        if (*sweep) return cmd_sweep(opt);
        if (*delta) return cmd_delta_check(opt);
        if (*widths) return cmd_widths(opt);
        if (*diagnose) return cmd_diagnose(opt);
        if (*gen) return cmd_gen(opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
