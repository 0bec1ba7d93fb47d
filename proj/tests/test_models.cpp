#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cliredact/errors.hpp"
#include "cliredact/models.hpp"
#include "cliredact/rng.hpp"
#include "cliredact/schema.hpp"
#include "cliredact/transforms.hpp"

using namespace cliredact;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

/// 20 points in 2D, separable with a wide margin along the first axis.
void separable_set(Matrix& features, std::vector<int>& labels) {
    features = Matrix(20, 2);
    labels.assign(20, 0);
    Rng rng(99);
    for (std::size_t i = 0; i < 20; ++i) {
        const bool positive = i < 10;
        features.at(i, 0) = positive ? 2.0 + rng.next_double() : -2.0 - rng.next_double();
        features.at(i, 1) = rng.next_range(-1.0, 1.0);
        labels[i] = positive ? 1 : 0;
    }
}

double training_accuracy(const TrainedModel& model, const Matrix& features,
                         const std::vector<int>& labels) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        const double score = predict_proba(model, features.row(i), features.cols);
        const int pred = score >= 0.5 ? 1 : 0;
        if (pred == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(features.rows);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.next_range(-2.0, 2.0);
    return m;
}

}  // namespace

TEST_CASE("lr fits a separable set perfectly") {
    Matrix features;
    std::vector<int> labels;
    separable_set(features, labels);
    ModelSpec spec;
    spec.kind = ModelKind::Lr;
    spec.seed = 1;
    const TrainedModel model = train(features, labels, spec);
    CHECK(training_accuracy(model, features, labels) == 1.0);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(predict_proba(model, features.row(i), 2) > 0.5);
    }
}

TEST_CASE("bt solves xor with depth-2 trees") {
    Matrix features(4, 2);
    features.at(0, 0) = 0.0; features.at(0, 1) = 0.0;
    features.at(1, 0) = 0.0; features.at(1, 1) = 1.0;
    features.at(2, 0) = 1.0; features.at(2, 1) = 0.0;
    features.at(3, 0) = 1.0; features.at(3, 1) = 1.0;
    const std::vector<int> labels = {0, 1, 1, 0};
    ModelSpec spec;
    spec.kind = ModelKind::Bt;
    spec.bt.rounds = 50;
    spec.bt.max_depth = 2;
    spec.seed = 1;
    const TrainedModel model = train(features, labels, spec);
    CHECK(training_accuracy(model, features, labels) == 1.0);
}

TEST_CASE("training is bitwise deterministic under a fixed seed") {
    Matrix features;
    std::vector<int> labels;
    separable_set(features, labels);

    for (ModelKind kind : {ModelKind::Lr, ModelKind::Bt, ModelKind::Nn}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.seed = 77;
        spec.nn.epochs = 5;
        spec.bt.rounds = 10;
        const TrainedModel a = train(features, labels, spec);
        const TrainedModel b = train(features, labels, spec);
        switch (kind) {
            case ModelKind::Lr:
                CHECK(a.params.lr.weights == b.params.lr.weights);
                CHECK(a.params.lr.bias == b.params.lr.bias);
                break;
            case ModelKind::Bt:
                CHECK(a.params.bt.alphas == b.params.bt.alphas);
                REQUIRE(a.params.bt.trees.size() == b.params.bt.trees.size());
                break;
            case ModelKind::Nn:
                CHECK(nn_flatten(a.params.nn) == nn_flatten(b.params.nn));
                break;
        }
    }
}

TEST_CASE("training input validation") {
    Matrix features(4, 2);
    CHECK_THROWS_AS(train(features, {1, 0, 1}, ModelSpec{}), ShapeError);
    CHECK_THROWS_AS(train(features, {1, 1, 1, 1}, ModelSpec{}), TrainingError);
    CHECK_THROWS_AS(train(features, {0, 0, 0, 0}, ModelSpec{}), TrainingError);
    Matrix one_row(1, 2);
    CHECK_THROWS_AS(train(one_row, {1}, ModelSpec{}), TrainingError);
}

TEST_CASE("lr with zero weights scores 0.5 and is monotone in positive weights") {
    TrainedModel model;
    model.spec.kind = ModelKind::Lr;
    model.feature_dim = 3;
    model.params.lr.weights = {0.0, 0.0, 0.0};
    model.params.lr.bias = 0.0;
    CHECK(predict_proba(model, {5.0, -2.0, 0.3}) == 0.5);

    model.params.lr.weights = {1.0, -0.5, 0.0};
    double previous = 0.0;
    for (double x = -3.0; x <= 3.0; x += 0.25) {
        const double score = predict_proba(model, {x, 1.0, 0.0});
        CHECK(score >= previous);
        previous = score;
    }
}

TEST_CASE("predict_proba stays in [0,1] and rejects bad dimensions") {
    Matrix features;
    std::vector<int> labels;
    separable_set(features, labels);
    Rng rng(5);
    for (ModelKind kind : {ModelKind::Lr, ModelKind::Bt, ModelKind::Nn}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.seed = 3;
        spec.nn.epochs = 3;
        spec.bt.rounds = 5;
        const TrainedModel model = train(features, labels, spec);
        for (int i = 0; i < 50; ++i) {
            const double score =
                predict_proba(model, {rng.next_range(-5, 5), rng.next_range(-5, 5)});
            CHECK(score >= 0.0);
            CHECK(score <= 1.0);
        }
        CHECK_THROWS_AS(predict_proba(model, {1.0, 2.0, 3.0}), ShapeError);
    }
}

TEST_CASE("lr analytic gradient matches central finite differences") {
    Rng rng(1234);
    const std::size_t n = 12, d = 5;
    Matrix features = random_matrix(n, d, rng);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = rng.next_bool(0.5) ? 1 : 0;
    labels[0] = 1;
    labels[1] = 0;

    LrModel model;
    model.weights.resize(d);
    for (double& w : model.weights) w = rng.next_range(-1.0, 1.0);
    model.bias = rng.next_range(-1.0, 1.0);
    const double l2 = 1e-3;

    const auto [grad, grad_bias] = lr_gradient(model, features, labels, l2);
    const double h = 1e-6;
    for (std::size_t j = 0; j < d; ++j) {
        LrModel plus = model, minus = model;
        plus.weights[j] += h;
        minus.weights[j] -= h;
        const double numeric =
            (lr_log_loss(plus, features, labels, l2) - lr_log_loss(minus, features, labels, l2)) /
            (2.0 * h);
        const double rel = std::abs(numeric - grad[j]) / std::max(1e-8, std::abs(numeric));
        CHECK(rel <= 1e-4);
    }
    LrModel plus = model, minus = model;
    plus.bias += h;
    minus.bias -= h;
    const double numeric_bias =
        (lr_log_loss(plus, features, labels, l2) - lr_log_loss(minus, features, labels, l2)) /
        (2.0 * h);
    CHECK(std::abs(numeric_bias - grad_bias) / std::max(1e-8, std::abs(numeric_bias)) <= 1e-4);
}

TEST_CASE("nn gradient matches central finite differences on a 5-feature toy net") {
    Rng rng(4321);
    const std::size_t n = 8, d = 5;
    Matrix features = random_matrix(n, d, rng);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = rng.next_bool(0.5) ? 1 : 0;
    labels[0] = 1;
    labels[1] = 0;

    ModelSpec spec;
    spec.kind = ModelKind::Nn;
    spec.nn.hidden = {4};
    spec.nn.epochs = 1;
    spec.seed = 9;
    TrainedModel model = train(features, labels, spec);

    const std::vector<double> analytic = nn_gradient(model.params.nn, features, labels);
    std::vector<double> flat = nn_flatten(model.params.nn);
    REQUIRE(analytic.size() == flat.size());
    const double h = 1e-6;
    for (std::size_t k = 0; k < flat.size(); ++k) {
        NnModel probe = model.params.nn;
        std::vector<double> bumped = flat;
        bumped[k] += h;
        nn_unflatten(probe, bumped);
        const double up = nn_loss(probe, features, labels);
        bumped[k] -= 2.0 * h;
        nn_unflatten(probe, bumped);
        const double down = nn_loss(probe, features, labels);
        const double numeric = (up - down) / (2.0 * h);
        const double rel =
            std::abs(numeric - analytic[k]) / std::max(1e-6, std::abs(numeric));
        CHECK(rel <= 1e-3);
    }
}

TEST_CASE("nn forward with all-zero weights outputs 0.5") {
    Matrix features;
    std::vector<int> labels;
    separable_set(features, labels);
    ModelSpec spec;
    spec.kind = ModelKind::Nn;
    spec.nn.epochs = 1;
    spec.seed = 8;
    TrainedModel model = train(features, labels, spec);
    for (Matrix& w : model.params.nn.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    for (std::vector<double>& b : model.params.nn.biases) std::fill(b.begin(), b.end(), 0.0);
    CHECK(predict_proba(model, {3.0, -1.0}) == 0.5);
}

TEST_CASE("adaboost training error converges under its non-increasing bound") {
    // A multi-cluster staircase needs many boosting rounds. The guaranteed
    // monotone quantity is the exponential bound; the raw 0/1 error must
    // stay below it, end at 0 on this consistent set, and never end above
    // where it started.
    std::vector<double> xs;
    std::vector<int> ys;
    const int sizes[6] = {40, 20, 10, 6, 4, 3};
    for (int c = 0; c < 6; ++c) {
        for (int i = 0; i < sizes[c]; ++i) {
            xs.push_back(c + 0.9 * i / std::max(1, sizes[c] - 1));
            ys.push_back(c % 2);
        }
    }
    Matrix features(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) features.at(i, 0) = xs[i];

    ModelSpec spec;
    spec.kind = ModelKind::Bt;
    spec.bt.rounds = 40;
    spec.bt.max_depth = 2;
    spec.seed = 1;
    const TrainedModel model = train(features, ys, spec);
    const std::vector<double> errors = bt_training_error_curve(model.params.bt, features, ys);
    const std::vector<double> bounds = bt_training_error_bound_curve(model.params.bt);
    REQUIRE(errors.size() >= 3);
    REQUIRE(bounds.size() == errors.size());
    for (std::size_t t = 1; t < bounds.size(); ++t) {
        CHECK(bounds[t] <= bounds[t - 1] + 1e-12);
    }
    for (std::size_t t = 0; t < errors.size(); ++t) {
        CHECK(errors[t] <= bounds[t] + 1e-12);
    }
    CHECK(errors.back() == 0.0);
    CHECK(errors.back() <= errors.front());
}

TEST_CASE("adaboost raw training error is non-increasing on a margin set") {
    // Wide-margin diagonal data converges in a couple of rounds; here the
    // raw per-round error itself is monotone.
    Rng rng(1);
    const std::size_t n = 60;
    Matrix features(n, 2);
    std::vector<int> labels(n);
    std::size_t i = 0;
    while (i < n) {
        const double a = rng.next_double();
        const double b = rng.next_double();
        if (std::abs(a + b - 1.0) < 0.2) continue;
        features.at(i, 0) = a;
        features.at(i, 1) = b;
        labels[i] = a + b > 1.0 ? 1 : 0;
        ++i;
    }
    ModelSpec spec;
    spec.kind = ModelKind::Bt;
    spec.bt.rounds = 40;
    spec.seed = 1;
    const TrainedModel model = train(features, labels, spec);
    const std::vector<double> errors = bt_training_error_curve(model.params.bt, features, labels);
    REQUIRE(errors.size() >= 2);
    for (std::size_t t = 1; t < errors.size(); ++t) {
        CHECK(errors[t] <= errors[t - 1] + 1e-12);
    }
    CHECK(errors.back() == 0.0);
}

TEST_CASE("lr importance normalizes absolute weights") {
    TrainedModel model;
    model.spec.kind = ModelKind::Lr;
    model.feature_dim = 2;
    model.params.lr.weights = {3.0, 1.0};
    model.params.lr.bias = 0.2;
    model.transform.config.kind = TransformKind::Bow;
    model.transform.vocabulary.terms = {"key", "name"};
    model.transform.vocabulary.index = {{"key", 0}, {"name", 1}};

    const auto entries = feature_importance(model, 10);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].word == "key");
    CHECK(entries[0].weight == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(entries[1].word == "name");
    CHECK(entries[1].weight == doctest::Approx(0.25).epsilon(1e-12));

    double total = 0.0;
    for (const auto& entry : entries) total += entry.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("bt importance on a keyword corpus points at the field-name block") {
    // Label is purely "field_name contains key"; BOW-PF features plus a
    // boosted tree should put the top importance on (Field Name, key).
    std::vector<FieldRecord> records;
    Rng rng(31415);
    const std::vector<std::string> benign = {"Location", "Status", "Size", "Zone", "Tier"};
    // Prefixes rotate so "key" is the only token every positive shares.
    const std::vector<std::string> prefixes = {"Account", "Storage", "Primary", "Secondary"};
    for (int i = 0; i < 120; ++i) {
        FieldRecord rec;
        rec.command = "Get-AzThing" + std::to_string(i % 7);
        rec.module = "Resources";
        const bool positive = i % 4 == 0;
        rec.field_name = positive ? prefixes[static_cast<std::size_t>(i / 4) % 4] + "Key"
                                  : benign[rng.next_index(benign.size())];
        rec.field_type = "string";
        rec.parent_type = "PSThing";
        rec.label = positive ? 1 : 0;
        records.push_back(rec);
    }
    FitOptions options;
    options.transform.kind = TransformKind::BowPf;
    const FittedTransform fitted = fit_transform(records, options);
    const Matrix features = build_feature_matrix(records, fitted);
    std::vector<int> labels;
    for (const FieldRecord& rec : records) labels.push_back(rec.label);

    ModelSpec spec;
    spec.kind = ModelKind::Bt;
    spec.bt.rounds = 20;
    spec.seed = 4;
    TrainedModel model = train(features, labels, spec);
    model.transform = fitted;

    const auto entries = feature_importance(model, 5);
    REQUIRE(!entries.empty());
    CHECK(entries[0].block == "Field Name");
    CHECK(entries[0].word == "key");

    const auto all_entries = feature_importance(model, model.feature_dim);
    double total = 0.0;
    for (const auto& entry : all_entries) total += entry.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("nn importance is unsupported") {
    Matrix features;
    std::vector<int> labels;
    separable_set(features, labels);
    ModelSpec spec;
    spec.kind = ModelKind::Nn;
    spec.nn.epochs = 1;
    spec.seed = 2;
    const TrainedModel model = train(features, labels, spec);
    CHECK_THROWS_AS(feature_importance(model, 5), UnsupportedError);
}

TEST_CASE("save/load round-trips scores exactly for every model kind") {
    Matrix features;
    std::vector<int> labels;
    separable_set(features, labels);
    Rng rng(606);
    const std::string path = temp_path("cliredact_model_roundtrip.json");

    for (ModelKind kind : {ModelKind::Lr, ModelKind::Bt, ModelKind::Nn}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.seed = 11;
        spec.nn.epochs = 4;
        spec.bt.rounds = 8;
        TrainedModel model = train(features, labels, spec);
        model.threshold = 0.37;
        model.metadata.corpus_fingerprint = "cafebabe";
        // Give the artifact a transform binding as a real pipeline would.
        std::vector<FieldRecord> recs(3);
        for (std::size_t i = 0; i < recs.size(); ++i) {
            recs[i].command = "Get-AzThing" + std::to_string(i);
            recs[i].field_name = i == 0 ? "AccountKey" : "Location";
            recs[i].field_type = "string";
        }
        FitOptions options;
        options.transform.kind = TransformKind::Bow;
        model.transform = fit_transform(recs, options);

        save_model(model, path);
        const TrainedModel loaded = load_model(path);
        CHECK(loaded.threshold == model.threshold);
        CHECK(loaded.metadata.corpus_fingerprint == "cafebabe");
        CHECK(loaded.transform.vocabulary.terms == model.transform.vocabulary.terms);
        CHECK(loaded.transform.fitted_doc_count == model.transform.fitted_doc_count);
        for (int i = 0; i < 100; ++i) {
            const std::vector<double> x = {rng.next_range(-4, 4), rng.next_range(-4, 4)};
            CHECK(predict_proba(loaded, x) == predict_proba(model, x));  // exact
        }
    }
    std::filesystem::remove(path);
}

TEST_CASE("save/load round-trips a we-bound artifact") {
    Matrix features(4, 6);
    Rng rng(99);
    for (double& v : features.data) v = rng.next_range(-1, 1);
    const std::vector<int> labels = {1, 0, 1, 0};
    ModelSpec spec;
    spec.kind = ModelKind::Lr;
    spec.seed = 5;
    TrainedModel model = train(features, labels, spec);

    model.transform.config.kind = TransformKind::We;
    model.transform.config.max_words = 2;
    model.transform.config.dims_per_word = 3;
    model.transform.embeddings = EmbeddingTable(3);
    model.transform.embeddings.insert("password", {0.1, 0.2, 0.5});
    model.transform.embeddings.insert("location", {-0.3, 0.0, 0.25});
    model.transform.fitted_doc_count = 4;

    const std::string path = temp_path("cliredact_model_we.json");
    save_model(model, path);
    const TrainedModel loaded = load_model(path);
    CHECK(loaded.transform.embeddings.dimension() == 3);
    CHECK(loaded.transform.embeddings.lookup("password") == std::vector<double>{0.1, 0.2, 0.5});
    std::filesystem::remove(path);
}

TEST_CASE("model loading rejects garbage, truncation and unknown versions") {
    const std::string path = temp_path("cliredact_model_bad.json");

    std::ofstream(path, std::ios::binary) << "{ not json";
    CHECK_THROWS_AS(load_model(path), LoadError);

    std::ofstream(path, std::ios::binary) << "{\"format\": \"something-else\"}";
    CHECK_THROWS_AS(load_model(path), LoadError);

    // Build a valid artifact then bump its version.
    Matrix features;
    std::vector<int> labels;
    separable_set(features, labels);
    ModelSpec spec;
    spec.kind = ModelKind::Lr;
    spec.seed = 1;
    TrainedModel model = train(features, labels, spec);
    save_model(model, path);

    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    const std::string truncated = content.substr(0, content.size() / 2);
    std::ofstream(path, std::ios::binary) << truncated;
    CHECK_THROWS_AS(load_model(path), LoadError);

    std::string bumped = content;
    const std::string needle = "\"format_version\": 1";
    bumped.replace(bumped.find(needle), needle.size(), "\"format_version\": 999");
    std::ofstream(path, std::ios::binary) << bumped;
    CHECK_THROWS_AS(load_model(path), LoadError);

    std::filesystem::remove(path);
}

TEST_CASE("artifacts from a different feature dimension fail at predict time") {
    Matrix features;
    std::vector<int> labels;
    separable_set(features, labels);
    ModelSpec spec;
    spec.kind = ModelKind::Lr;
    spec.seed = 1;
    const TrainedModel model = train(features, labels, spec);
    CHECK_THROWS_AS(predict_proba(model, std::vector<double>(9, 0.0)), ShapeError);
}

TEST_CASE("corpus fingerprints differ when any field differs") {
    std::vector<FieldRecord> a(2), b(2);
    a[0].command = b[0].command = "Get-AzVM";
    a[1].command = b[1].command = "Get-AzDisk";
    a[1].field_name = "Key";
    b[1].field_name = "Keys";
    CHECK(corpus_fingerprint(a) != corpus_fingerprint(b));
    CHECK(corpus_fingerprint(a) == corpus_fingerprint(a));
}

TEST_CASE("a two-hidden-layer network trains and scores") {
    Matrix features;
    std::vector<int> labels;
    separable_set(features, labels);
    ModelSpec spec;
    spec.kind = ModelKind::Nn;
    spec.nn.hidden = {8, 4};
    spec.nn.epochs = 30;
    spec.seed = 21;
    const TrainedModel model = train(features, labels, spec);
    REQUIRE(model.params.nn.layer_sizes == std::vector<std::size_t>{2, 8, 4, 1});
    CHECK(training_accuracy(model, features, labels) >= 0.9);

    // Gradient check holds across depth too.
    const std::vector<double> analytic = nn_gradient(model.params.nn, features, labels);
    std::vector<double> flat = nn_flatten(model.params.nn);
    const double h = 1e-6;
    for (std::size_t k = 0; k < flat.size(); k += 7) {
        NnModel probe = model.params.nn;
        std::vector<double> bumped = flat;
        bumped[k] += h;
        nn_unflatten(probe, bumped);
        const double up = nn_loss(probe, features, labels);
        bumped[k] -= 2.0 * h;
        nn_unflatten(probe, bumped);
        const double down = nn_loss(probe, features, labels);
        const double numeric = (up - down) / (2.0 * h);
        CHECK(std::abs(numeric - analytic[k]) / std::max(1e-6, std::abs(numeric)) <= 1e-3);
    }
}

TEST_CASE("stumps cannot boost past chance on xor and degrade to 0.5") {
    // Every depth-1 split of xor has weighted error exactly 0.5, so boosting
    // stops with no trees and the model abstains at probability 0.5.
    Matrix features(4, 2);
    features.at(0, 0) = 0.0; features.at(0, 1) = 0.0;
    features.at(1, 0) = 0.0; features.at(1, 1) = 1.0;
    features.at(2, 0) = 1.0; features.at(2, 1) = 0.0;
    features.at(3, 0) = 1.0; features.at(3, 1) = 1.0;
    const std::vector<int> labels = {0, 1, 1, 0};
    ModelSpec spec;
    spec.kind = ModelKind::Bt;
    spec.bt.rounds = 50;
    spec.bt.max_depth = 1;
    spec.seed = 1;
    const TrainedModel model = train(features, labels, spec);
    CHECK(model.params.bt.trees.empty());
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(predict_proba(model, features.row(i), 2) == 0.5);
    }
}

TEST_CASE("a we-bound model with inconsistent dimensions fails with a config error") {
    Matrix features(4, 6);
    Rng rng(3);
    for (double& v : features.data) v = rng.next_range(-1, 1);
    const std::vector<int> labels = {1, 0, 1, 0};
    ModelSpec spec;
    spec.kind = ModelKind::Lr;
    spec.seed = 5;
    TrainedModel model = train(features, labels, spec);
    model.transform.config.kind = TransformKind::We;
    model.transform.config.max_words = 2;
    model.transform.config.dims_per_word = 3;
    model.transform.embeddings = EmbeddingTable(5);  // wrong width

    FieldRecord record;
    record.command = "Get-AzVM";
    record.field_name = "AdminPassword";
    CHECK_THROWS_AS(predict_record(model, record), ConfigError);
}
