#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include "json.hpp"
#include "ssml/model.hpp"

namespace ssml {

/// FNV-1a over the label matrix shape and bits. The model file stores this
/// instead of the training data itself; attach_training() checks it when the
/// caller re-supplies the data at prediction time.
inline std::string label_hash(const DenseMatrix& labels) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    mix(labels.rows());
    mix(labels.cols());
    for (double v : labels.values()) mix(v != 0.0 ? 1 : 0);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// The persisted part of a SketchedModel: everything except the training
/// embedding and labels, which are reconstructed from the training data.
struct ModelFile {
    DenseMatrix v_hat;
    index_t k = 1;
    double theta = 0.5;
    std::optional<SketchMeta> sketch_meta;
    std::string train_labels_hash;
    index_t n_train = 0;
    double fit_seconds = 0.0;
};

inline void save_model(const SketchedModel& model, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = "ssml-model";
    j["version"] = 1;
    j["p"] = model.p();
    j["q"] = model.q();
    j["k"] = model.k;
    j["theta"] = model.theta;
    if (model.sketch_meta) {
        j["sketch"] = {{"variant", to_string(model.sketch_meta->variant)},
                       {"m", model.sketch_meta->m},
                       {"seed", model.sketch_meta->seed}};
    } else {
        j["sketch"] = nullptr;
    }
    j["n_train"] = model.n_train();
    j["train_labels_hash"] = label_hash(model.train_labels);
    j["fit_seconds"] = model.fit_seconds;
    j["v_hat"] = model.v_hat.values();

    std::ofstream out(path);
    if (!out) detail::failf("cannot write model file '", path, "'");
    out << j.dump(2) << '\n';
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::failf("cannot open model file '", path, "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        detail::failf("model file '", path, "': ", e.what());
    }
    if (j.value("format", "") != "ssml-model")
        detail::failf("model file '", path, "': unrecognized format");

    ModelFile mf;
    const index_t p = j.at("p").get<index_t>();
    const index_t q = j.at("q").get<index_t>();
    mf.v_hat = DenseMatrix(p, q, j.at("v_hat").get<std::vector<double>>());
    mf.k = j.at("k").get<index_t>();
    mf.theta = j.at("theta").get<double>();
    if (!j.at("sketch").is_null()) {
        SketchMeta meta;
        meta.variant = sketch_variant_from_string(j["sketch"].at("variant").get<std::string>());
        meta.m = j["sketch"].at("m").get<index_t>();
        meta.seed = j["sketch"].at("seed").get<std::uint64_t>();
        mf.sketch_meta = meta;
    }
    mf.train_labels_hash = j.at("train_labels_hash").get<std::string>();
    mf.n_train = j.at("n_train").get<index_t>();
    mf.fit_seconds = j.value("fit_seconds", 0.0);
    return mf;
}

/// Rebuilds a usable model from a model file plus the original training data.
/// The supplied labels must hash to the stored digest.
inline SketchedModel attach_training(const ModelFile& mf, const DenseMatrix& x_train,
                                     const DenseMatrix& y_train) {
    if (x_train.cols() != mf.v_hat.rows())
        detail::failf("attach_training: X has ", x_train.cols(), " features, model expects ",
                      mf.v_hat.rows());
    if (x_train.rows() != mf.n_train || y_train.rows() != mf.n_train)
        detail::failf("attach_training: expected ", mf.n_train, " training rows");
    if (label_hash(y_train) != mf.train_labels_hash)
        detail::fail("attach_training: training labels do not match the stored hash");

    SketchedModel model;
    model.v_hat = mf.v_hat;
    model.train_labels = y_train;
    model.train_embedding = matmul(x_train, mf.v_hat);
    model.k = mf.k;
    model.theta = mf.theta;
    model.sketch_meta = mf.sketch_meta;
    model.fit_seconds = mf.fit_seconds;
    return model;
}

}  // namespace ssml
