#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssml/experiment.hpp"
#include "ssml/model_io.hpp"

using namespace ssml;

namespace {
std::string temp_path(const std::string& tag) {
    static int counter = 0;
    const auto path = (std::filesystem::temp_directory_path() /
                       ("ssml_exp_" + tag + "_" + std::to_string(counter++) + ".txt"))
                          .string();
    std::filesystem::remove(path);  // CSV writes append; start clean
    return path;
}

ExperimentConfig planted_config(index_t n, index_t p, index_t q) {
    ExperimentConfig cfg;
    SyntheticSpec spec;
    spec.kind = SyntheticKind::planted_linear;
    spec.n = n;
    spec.p = p;
    spec.q = q;
    spec.noise_sigma = 0.5;
    spec.seed = 7;
    cfg.synthetic = spec;
    cfg.k = 5;
    cfg.test_fraction = 0.25;
    return cfg;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        rows.push_back(fields);
    }
    return rows;
}
}  // namespace

TEST_CASE("run_experiment: exact-only grid emits one row per seed with empty m") {
    ExperimentConfig cfg = planted_config(500, 8, 3);
    cfg.methods = {"exact"};
    cfg.seeds = {1, 2, 3};
    const auto result = run_experiment(cfg);
    REQUIRE(result.rows.size() == 3);
    CHECK(result.failures.empty());
    for (const auto& row : result.rows) {
        CHECK(row.method == "exact");
        CHECK_FALSE(row.m.has_value());
        CHECK(row.metrics.hamming_loss >= 0.0);
        CHECK(row.metrics.hamming_loss <= 1.0);
        CHECK(row.metrics.fit_seconds > 0.0);
    }
}

TEST_CASE("run_experiment: identical configs give identical CSV modulo timing columns") {
    ExperimentConfig cfg = planted_config(200, 6, 3);
    cfg.methods = {"exact", "gauss", "wh"};
    cfg.m_grid = {16, 64};
    cfg.seeds = {11, 12};

    const std::string csv1 = temp_path("det1"), csv2 = temp_path("det2");
    cfg.out_csv = csv1;
    (void)run_experiment(cfg);
    cfg.out_csv = csv2;
    (void)run_experiment(cfg);

    auto a = read_csv(csv1);
    auto b = read_csv(csv2);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == 1 + 2 * (1 + 2 + 2));  // header + per-seed cells
    CHECK(a[0] == std::vector<std::string>{"dataset", "method", "m", "k", "seed", "hamming",
                                           "example_f1", "fit_s", "predict_s"});
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].size() == 9);
        for (std::size_t c = 0; c < 7; ++c) CHECK(a[i][c] == b[i][c]);  // all but fit_s, predict_s
    }
}

TEST_CASE("run_experiment: a failing cell is recorded and other cells survive") {
    ExperimentConfig cfg = planted_config(30, 4, 2);
    cfg.methods = {"gauss"};
    cfg.test_fraction = 1.0 / 3.0;  // 20 training rows
    cfg.m_grid = {4, 25};           // 25 > 20 fails at operator build
    cfg.k = 3;
    cfg.seeds = {5};
    cfg.out_csv = temp_path("fail");
    const auto result = run_experiment(cfg);
    REQUIRE(result.rows.size() == 1);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].m == index_t{25});
    CHECK_FALSE(result.failures[0].message.empty());
    // CSV holds exactly the completed cell
    const auto rows = read_csv(cfg.out_csv);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][2] == "4");
}

TEST_CASE("run_experiment: rejects m larger than the dataset") {
    ExperimentConfig cfg = planted_config(30, 4, 2);
    cfg.m_grid = {64};
    CHECK_THROWS_AS(run_experiment(cfg), error);
}

TEST_CASE("run_experiment: parallel cells produce the same rows as sequential") {
    ExperimentConfig cfg = planted_config(120, 5, 2);
    cfg.methods = {"exact", "wh"};
    cfg.m_grid = {16};
    cfg.seeds = {3, 4};
    const auto seq = run_experiment(cfg);
    cfg.parallel_cells = true;
    const auto par = run_experiment(cfg);
    CHECK_FALSE(par.timings_comparable);
    REQUIRE(par.rows.size() == seq.rows.size());
    for (std::size_t i = 0; i < seq.rows.size(); ++i) {
        CHECK(par.rows[i].method == seq.rows[i].method);
        CHECK(par.rows[i].metrics.hamming_loss == seq.rows[i].metrics.hamming_loss);
        CHECK(par.rows[i].metrics.example_f1 == seq.rows[i].metrics.example_f1);
    }
}

TEST_CASE("run_delta_sweep: all-rows WH hits delta ~ 0 and medians decrease") {
    ExperimentConfig cfg = planted_config(64, 6, 3);
    cfg.methods = {"wh"};
    cfg.m_grid = {16, 64};
    cfg.seeds = {21, 22, 23};
    const auto result = run_delta_sweep(cfg);
    REQUIRE(result.per_m.size() == 2);
    CHECK(result.per_m[1].median_delta_emp <= result.per_m[0].median_delta_emp);
    CHECK(result.per_m[1].median_delta_emp <= 1e-8);  // m = n' = n keeps all rows
    for (const auto& rep : result.reports) {
        CHECK(rep.f_star > 0.0);
        CHECK(rep.g_hat >= 0.0);
    }
    const auto j = to_json(result);
    CHECK(j["reports"].size() == 6);
    CHECK(j["reports"][0].contains("f_star"));
    CHECK(j["reports"][0].contains("g_hat"));
}

TEST_CASE("run_widths: basis rank, monotone recommendations, schema round trip") {
    ExperimentConfig cfg = planted_config(64, 8, 3);
    cfg.m_grid = {16, 32};
    cfg.samples = 400;
    cfg.seeds = {31};
    const auto result = run_widths(cfg);
    CHECK(result.basis_rank == 8);
    CHECK(result.gaussian.mean > 0.0);
    CHECK(result.rademacher.mean > 0.0);
    REQUIRE(result.s_gaussian.size() == 2);

    // recommended m grows as delta shrinks
    const auto j = to_json(result);
    index_t prev = 0;
    for (auto it = j["recommendations"].rbegin(); it != j["recommendations"].rend(); ++it) {
        const index_t m = (*it)["m_subgaussian"].get<index_t>();
        CHECK(m >= prev);
        prev = m;
    }

    const auto parsed = nlohmann::json::parse(j.dump());
    CHECK(parsed["widths"][0]["kind"] == "gaussian");
    CHECK(parsed["widths"][0]["samples"] == 400);
}

TEST_CASE("run_diagnose: smooth synthetic supplies bayes errors and lipschitz") {
    ExperimentConfig cfg;
    SyntheticSpec spec;
    spec.kind = SyntheticKind::smooth_bayes;
    spec.n = 300;
    spec.p = 2;
    spec.q = 3;
    spec.lipschitz_scale = 1.0;
    spec.seed = 9;
    cfg.synthetic = spec;
    cfg.k = 5;
    cfg.eps_grid = {0.4, 0.2, 0.1};
    const auto result = run_diagnose(cfg);
    CHECK(result.diameter > 0.0);
    REQUIRE(result.euclidean_curve.size() == 3);
    CHECK(result.bound_knn >= result.inputs.bayes_errors[0]);
    CHECK(result.inputs.bayes_errors.size() == 3);
    CHECK(result.inputs.lipschitz > 0.0);
    // planar data: doubling proxy should land near 2
    CHECK(result.doubling_euclidean.slope >= 1.0);
    CHECK(result.doubling_euclidean.slope <= 3.0);
}

TEST_CASE("run_diagnose: file datasets get zero bayes errors and a note") {
    ExperimentConfig cfg = planted_config(100, 4, 2);
    cfg.k = 3;
    const auto result = run_diagnose(cfg);
    for (double e : result.inputs.bayes_errors) CHECK(e == 0.0);
    bool found = false;
    for (const auto& note : result.notes)
        if (note.find("bayes") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("model file round trip preserves predictions") {
    ExperimentConfig cfg = planted_config(80, 6, 3);
    const auto data = resolve_dataset(cfg);
    const auto [train, test] = train_test_split(data.ds, 0.2, 13);
    const DenseMatrix x = train.densify();
    const auto op = build_subgaussian(24, x.rows(), SketchVariant::subgaussian_gaussian, 15);
    const auto model = fit_sketched(x, train.labels, op, 4);

    const std::string path = temp_path("model");
    save_model(model, path);
    const ModelFile mf = load_model(path);
    CHECK(mf.k == 4);
    REQUIRE(mf.sketch_meta.has_value());
    CHECK(mf.sketch_meta->m == 24);
    CHECK(mf.sketch_meta->variant == SketchVariant::subgaussian_gaussian);

    const auto revived = attach_training(mf, x, train.labels);
    const DenseMatrix xt = test.densify();
    CHECK(predict(revived, xt) == predict(model, xt));

    DenseMatrix tampered = train.labels;
    tampered(0, 0) = 1.0 - tampered(0, 0);
    CHECK_THROWS_WITH(attach_training(mf, x, tampered),
                      Catch::Matchers::ContainsSubstring("hash"));
}
