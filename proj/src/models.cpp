#include "cliredact/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cliredact/errors.hpp"
#include "cliredact/rng.hpp"

namespace cliredact {

const char* model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Lr: return "lr";
        case ModelKind::Bt: return "bt";
        case ModelKind::Nn: return "nn";
    }
    return "unknown";
}

ModelKind model_from_name(const std::string& name) {
    if (name == "lr") return ModelKind::Lr;
    if (name == "bt") return ModelKind::Bt;
    if (name == "nn") return ModelKind::Nn;
    throw ConfigError("unknown model: " + name);
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_training_inputs(const Matrix& features, const std::vector<int>& labels) {
    if (features.rows != labels.size()) {
        throw ShapeError("feature rows do not match label count");
    }
    if (features.rows < 2) {
        throw TrainingError("training needs at least 2 examples");
    }
    if (features.cols == 0) {
        throw ShapeError("training needs at least 1 feature");
    }
    bool has_pos = false, has_neg = false;
    for (int label : labels) {
        (label != 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw TrainingError("training needs both classes present");
    }
}

// --- logistic regression ---

LrModel train_lr(const Matrix& features, const std::vector<int>& labels,
                 const LrHyperparams& hp) {
    LrModel model;
    model.weights.assign(features.cols, 0.0);
    model.bias = 0.0;

    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    std::vector<double> grad(d);
    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = features.row(i);
            double z = model.bias;
            for (std::size_t j = 0; j < d; ++j) z += model.weights[j] * x[j];
            const double err = sigmoid(z) - (labels[i] != 0 ? 1.0 : 0.0);
            for (std::size_t j = 0; j < d; ++j) grad[j] += err * x[j];
            grad_bias += err;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) {
            model.weights[j] -= hp.learning_rate * (grad[j] * inv_n + hp.l2 * model.weights[j]);
        }
        model.bias -= hp.learning_rate * grad_bias * inv_n;
    }
    return model;
}

// --- boosted trees ---

struct TreeBuilder {
    const Matrix& features;
    const std::vector<int>& targets;  // -1 / +1
    const std::vector<double>& weights;
    std::size_t max_depth;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t>& idx, std::size_t depth) {
        double w_pos = 0.0, w_neg = 0.0;
        for (std::size_t i : idx) {
            (targets[i] > 0 ? w_pos : w_neg) += weights[i];
        }
        const double w_total = w_pos + w_neg;

        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[node_id].leaf_value = w_pos >= w_neg ? 1.0 : -1.0;
        if (depth >= max_depth || w_pos == 0.0 || w_neg == 0.0 || idx.size() < 2) {
            return node_id;
        }

        // Exact greedy split: minimize weighted Gini impurity of the children.
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = 1.0;  // gini is always < 1
        std::vector<std::pair<double, std::size_t>> sorted;
        for (std::size_t j = 0; j < features.cols; ++j) {
            sorted.clear();
            sorted.reserve(idx.size());
            for (std::size_t i : idx) sorted.emplace_back(features.at(i, j), i);
            std::sort(sorted.begin(), sorted.end());
            if (sorted.front().first == sorted.back().first) continue;

            double left_pos = 0.0, left_neg = 0.0;
            for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
                const std::size_t i = sorted[k].second;
                (targets[i] > 0 ? left_pos : left_neg) += weights[i];
                if (sorted[k].first == sorted[k + 1].first) continue;

                const double wl = left_pos + left_neg;
                const double wr = w_total - wl;
                if (wl <= 0.0 || wr <= 0.0) continue;
                const double right_pos = w_pos - left_pos;
                const double right_neg = w_neg - left_neg;
                const double gini_l =
                    1.0 - (left_pos / wl) * (left_pos / wl) - (left_neg / wl) * (left_neg / wl);
                const double gini_r = 1.0 - (right_pos / wr) * (right_pos / wr) -
                                      (right_neg / wr) * (right_neg / wr);
                const double score = (wl * gini_l + wr * gini_r) / w_total;
                if (score < best_score) {
                    best_score = score;
                    best_feature = static_cast<int>(j);
                    best_threshold = (sorted[k].first + sorted[k + 1].first) / 2.0;
                }
            }
        }
        if (best_feature < 0) {
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (features.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold) {
                left_idx.push_back(i);
            } else {
                right_idx.push_back(i);
            }
        }
        if (left_idx.empty() || right_idx.empty()) {
            return node_id;
        }
        nodes[node_id].feature = best_feature;
        nodes[node_id].threshold = best_threshold;
        const int left = build(left_idx, depth + 1);
        const int right = build(right_idx, depth + 1);
        nodes[node_id].left = left;
        nodes[node_id].right = right;
        return node_id;
    }
};

Tree fit_tree(const Matrix& features, const std::vector<int>& targets,
              const std::vector<double>& weights, std::size_t max_depth) {
    TreeBuilder builder{features, targets, weights, max_depth, {}};
    std::vector<std::size_t> idx(features.rows);
    std::iota(idx.begin(), idx.end(), 0);
    builder.build(idx, 0);
    Tree tree;
    tree.nodes = std::move(builder.nodes);
    return tree;
}

BtModel train_bt(const Matrix& features, const std::vector<int>& labels,
                 const BtHyperparams& hp) {
    const std::size_t n = features.rows;
    std::vector<int> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = labels[i] != 0 ? 1 : -1;

    BtModel model;
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    std::vector<double> preds(n);
    for (std::size_t round = 0; round < hp.rounds; ++round) {
        Tree tree = fit_tree(features, targets, weights, hp.max_depth);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = tree.predict(features.row(i));
            if (static_cast<int>(preds[i]) != targets[i]) err += weights[i];
        }
        if (err >= 0.5) break;  // no better than chance; boosting cannot continue

        const double eps = std::max(err, 1e-12);
        const double alpha = 0.5 * std::log((1.0 - eps) / eps);
        model.alphas.push_back(alpha);
        model.trees.push_back(std::move(tree));
        model.round_errors.push_back(err);
        if (err <= 0.0) break;  // perfect round; weights would not change

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] *= std::exp(-alpha * targets[i] * preds[i]);
            total += weights[i];
        }
        for (double& w : weights) w /= total;
    }
    return model;
}

double bt_margin(const BtModel& model, const double* x) {
    if (model.trees.empty()) return 0.0;
    double margin = 0.0, alpha_total = 0.0;
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        margin += model.alphas[t] * model.trees[t].predict(x);
        alpha_total += model.alphas[t];
    }
    return alpha_total > 0.0 ? margin / alpha_total : 0.0;
}

// --- neural network ---

NnModel init_nn(std::size_t input_dim, const NnHyperparams& hp, Rng& rng) {
    NnModel model;
    model.layer_sizes.push_back(input_dim);
    for (std::size_t h : hp.hidden) {
        if (h == 0) throw ConfigError("hidden layer size must be positive");
        model.layer_sizes.push_back(h);
    }
    model.layer_sizes.push_back(1);
    for (std::size_t k = 0; k + 1 < model.layer_sizes.size(); ++k) {
        const std::size_t fan_in = model.layer_sizes[k];
        const std::size_t fan_out = model.layer_sizes[k + 1];
        Matrix w(fan_out, fan_in);
        const double span = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : w.data) v = rng.next_range(-span, span);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

/// Forward pass; fills per-layer activations (activations[0] is the input).
double nn_forward(const NnModel& model, const double* x,
                  std::vector<std::vector<double>>* activations = nullptr) {
    std::vector<double> current(x, x + model.layer_sizes[0]);
    if (activations) {
        activations->clear();
        activations->push_back(current);
    }
    const std::size_t layers = model.weights.size();
    for (std::size_t k = 0; k < layers; ++k) {
        const Matrix& w = model.weights[k];
        std::vector<double> next(w.rows, 0.0);
        for (std::size_t r = 0; r < w.rows; ++r) {
            double z = model.biases[k][r];
            const double* wr = w.row(r);
            for (std::size_t c = 0; c < w.cols; ++c) z += wr[c] * current[c];
            next[r] = k + 1 == layers ? sigmoid(z) : std::max(0.0, z);
        }
        current = std::move(next);
        if (activations) activations->push_back(current);
    }
    return current[0];
}

void nn_backward_accumulate(const NnModel& model, const double* x, double label, double scale,
                            std::vector<Matrix>& grad_w,
                            std::vector<std::vector<double>>& grad_b) {
    std::vector<std::vector<double>> activations;
    const double out = nn_forward(model, x, &activations);

    const std::size_t layers = model.weights.size();
    // d(BCE)/d(z_out) = sigmoid(z) - y.
    std::vector<double> delta{(out - label) * scale};
    for (std::size_t k = layers; k-- > 0;) {
        const Matrix& w = model.weights[k];
        const std::vector<double>& input = activations[k];
        for (std::size_t r = 0; r < w.rows; ++r) {
            grad_b[k][r] += delta[r];
            double* gw = grad_w[k].row(r);
            for (std::size_t c = 0; c < w.cols; ++c) gw[c] += delta[r] * input[c];
        }
        if (k == 0) break;
        std::vector<double> prev_delta(w.cols, 0.0);
        for (std::size_t c = 0; c < w.cols; ++c) {
            if (activations[k][c] <= 0.0) continue;  // relu gate
            double sum = 0.0;
            for (std::size_t r = 0; r < w.rows; ++r) sum += delta[r] * w.at(r, c);
            prev_delta[c] = sum;
        }
        delta = std::move(prev_delta);
    }
}

NnModel train_nn(const Matrix& features, const std::vector<int>& labels, const NnHyperparams& hp,
                 std::uint64_t seed) {
    if (hp.batch_size == 0) throw ConfigError("batch size must be positive");
    Rng rng(seed);
    NnModel model = init_nn(features.cols, hp, rng);

    const std::size_t n = features.rows;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<Matrix> grad_w;
    std::vector<std::vector<double>> grad_b;
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        grad_w.emplace_back(model.weights[k].rows, model.weights[k].cols);
        grad_b.emplace_back(model.biases[k].size(), 0.0);
    }

    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += hp.batch_size) {
            const std::size_t end = std::min(n, start + hp.batch_size);
            const double scale = 1.0 / static_cast<double>(end - start);
            for (Matrix& g : grad_w) std::fill(g.data.begin(), g.data.end(), 0.0);
            for (std::vector<double>& g : grad_b) std::fill(g.begin(), g.end(), 0.0);
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t row = order[i];
                nn_backward_accumulate(model, features.row(row),
                                       labels[row] != 0 ? 1.0 : 0.0, scale, grad_w, grad_b);
            }
            for (std::size_t k = 0; k < model.weights.size(); ++k) {
                for (std::size_t v = 0; v < model.weights[k].data.size(); ++v) {
                    model.weights[k].data[v] -= hp.learning_rate * grad_w[k].data[v];
                }
                for (std::size_t v = 0; v < model.biases[k].size(); ++v) {
                    model.biases[k][v] -= hp.learning_rate * grad_b[k][v];
                }
            }
        }
    }
    return model;
}

}  // namespace

double Tree::predict(const double* x) const {
    if (nodes.empty()) return 1.0;
    int node = 0;
    while (nodes[node].feature >= 0) {
        node = x[static_cast<std::size_t>(nodes[node].feature)] <= nodes[node].threshold
                   ? nodes[node].left
                   : nodes[node].right;
    }
    return nodes[node].leaf_value;
}

std::vector<std::size_t> Tree::split_features() const {
    std::vector<std::size_t> out;
    for (const TreeNode& node : nodes) {
        if (node.feature >= 0) out.push_back(static_cast<std::size_t>(node.feature));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

TrainedModel train(const Matrix& features, const std::vector<int>& labels, const ModelSpec& spec) {
    check_training_inputs(features, labels);
    TrainedModel model;
    model.spec = spec;
    model.feature_dim = features.cols;
    switch (spec.kind) {
        case ModelKind::Lr:
            model.params.lr = train_lr(features, labels, spec.lr);
            break;
        case ModelKind::Bt:
            model.params.bt = train_bt(features, labels, spec.bt);
            break;
        case ModelKind::Nn:
            model.params.nn = train_nn(features, labels, spec.nn, spec.seed);
            break;
    }
    return model;
}

double predict_proba(const TrainedModel& model, const double* features, std::size_t n) {
    if (n != model.feature_dim) {
        throw ShapeError("feature length " + std::to_string(n) + " does not match model dimension " +
                         std::to_string(model.feature_dim));
    }
    switch (model.spec.kind) {
        case ModelKind::Lr: {
            double z = model.params.lr.bias;
            for (std::size_t j = 0; j < n; ++j) z += model.params.lr.weights[j] * features[j];
            return sigmoid(z);
        }
        case ModelKind::Bt:
            // Normalized ensemble margin in [-1, 1] mapped onto [0, 1].
            return (bt_margin(model.params.bt, features) + 1.0) / 2.0;
        case ModelKind::Nn:
            return nn_forward(model.params.nn, features);
    }
    throw ConfigError("unknown model kind");
}

double predict_proba(const TrainedModel& model, const std::vector<double>& features) {
    return predict_proba(model, features.data(), features.size());
}

std::vector<double> predict_proba_all(const TrainedModel& model, const Matrix& features) {
    std::vector<double> scores(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) {
        scores[i] = predict_proba(model, features.row(i), features.cols);
    }
    return scores;
}

double predict_record(const TrainedModel& model, const FieldRecord& record) {
    return predict_proba(model, model.transform.apply(record).values);
}

namespace {

ImportanceEntry describe_feature(const FittedTransform& transform, std::size_t index,
                                 double weight) {
    ImportanceEntry entry;
    entry.feature_index = index;
    entry.weight = weight;
    switch (transform.config.kind) {
        case TransformKind::Bow:
        case TransformKind::Tfidf:
            if (index < transform.vocabulary.size()) entry.word = transform.vocabulary.terms[index];
            break;
        case TransformKind::BowPf:
        case TransformKind::TfidfPf: {
            const std::size_t vocab = transform.vocabulary.size();
            if (vocab > 0 && index < 6 * vocab) {
                entry.block = kFeatureNames[index / vocab];
                entry.word = transform.vocabulary.terms[index % vocab];
            }
            break;
        }
        case TransformKind::We: {
            const std::size_t l = transform.config.dims_per_word;
            if (l > 0) {
                entry.word =
                    "w" + std::to_string(index / l) + "[" + std::to_string(index % l) + "]";
            }
            break;
        }
    }
    return entry;
}

}  // namespace

std::vector<ImportanceEntry> feature_importance(const TrainedModel& model, std::size_t top_k) {
    std::vector<double> raw(model.feature_dim, 0.0);
    switch (model.spec.kind) {
        case ModelKind::Lr:
            for (std::size_t j = 0; j < model.params.lr.weights.size(); ++j) {
                raw[j] = std::abs(model.params.lr.weights[j]);
            }
            break;
        case ModelKind::Bt:
            for (std::size_t t = 0; t < model.params.bt.trees.size(); ++t) {
                for (std::size_t j : model.params.bt.trees[t].split_features()) {
                    raw[j] += model.params.bt.alphas[t];
                }
            }
            break;
        case ModelKind::Nn:
            throw UnsupportedError("feature importance is not defined for nn models");
    }
    double total = 0.0;
    for (double v : raw) total += v;
    if (total > 0.0) {
        for (double& v : raw) v /= total;
    }

    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (raw[a] != raw[b]) return raw[a] > raw[b];
        return a < b;
    });
    const std::size_t k = std::min(top_k, order.size());
    std::vector<ImportanceEntry> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back(describe_feature(model.transform, order[i], raw[order[i]]));
    }
    return out;
}

// --- serialization ---

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "cliredact-model";

nlohmann::ordered_json tree_to_json(const Tree& tree) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const TreeNode& node : tree.nodes) {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"leaf_value", node.leaf_value},
                         {"left", node.left},
                         {"right", node.right}});
    }
    return nlohmann::ordered_json{{"nodes", std::move(nodes)}};
}

Tree tree_from_json(const nlohmann::json& j) {
    Tree tree;
    for (const nlohmann::json& n : j.at("nodes")) {
        TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.leaf_value = n.at("leaf_value").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        tree.nodes.push_back(node);
    }
    return tree;
}

nlohmann::ordered_json transform_to_json(const FittedTransform& transform) {
    nlohmann::ordered_json j;
    j["kind"] = transform_name(transform.config.kind);
    j["tokenizer"] = {{"lowercase_output", transform.tokenizer_config.lowercase_output},
                      {"max_tokens_per_feature", transform.tokenizer_config.max_tokens_per_feature}};
    j["max_words"] = transform.config.max_words;
    j["dims_per_word"] = transform.config.dims_per_word;
    j["vocabulary"] = transform.vocabulary.terms;
    j["doc_count"] = transform.df.doc_count;
    j["total_docs"] = transform.df.total_docs;
    j["fitted_doc_count"] = transform.fitted_doc_count;
    if (transform.config.kind == TransformKind::We) {
        nlohmann::ordered_json words = nlohmann::ordered_json::array();
        for (const std::string& word : transform.embeddings.words()) {
            words.push_back({word, transform.embeddings.lookup(word)});
        }
        j["embeddings"] = {{"dimension", transform.embeddings.dimension()},
                           {"words", std::move(words)}};
    } else {
        j["embeddings"] = nullptr;
    }
    return j;
}

FittedTransform transform_from_json(const nlohmann::json& j) {
    FittedTransform transform;
    transform.config.kind = transform_from_name(j.at("kind").get<std::string>());
    transform.tokenizer_config.lowercase_output =
        j.at("tokenizer").at("lowercase_output").get<bool>();
    transform.tokenizer_config.max_tokens_per_feature =
        j.at("tokenizer").at("max_tokens_per_feature").get<std::size_t>();
    transform.config.max_words = j.at("max_words").get<std::size_t>();
    transform.config.dims_per_word = j.at("dims_per_word").get<std::size_t>();
    transform.vocabulary.terms = j.at("vocabulary").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < transform.vocabulary.terms.size(); ++i) {
        transform.vocabulary.index.emplace(transform.vocabulary.terms[i], i);
    }
    transform.df.doc_count = j.at("doc_count").get<std::vector<std::size_t>>();
    transform.df.total_docs = j.at("total_docs").get<std::size_t>();
    transform.fitted_doc_count = j.at("fitted_doc_count").get<std::size_t>();
    if (!j.at("embeddings").is_null()) {
        const nlohmann::json& e = j.at("embeddings");
        transform.embeddings = EmbeddingTable(e.at("dimension").get<std::size_t>());
        for (const nlohmann::json& pair : e.at("words")) {
            transform.embeddings.insert(pair.at(0).get<std::string>(),
                                        pair.at(1).get<std::vector<double>>());
        }
    }
    return transform;
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = kFormatName;
    j["format_version"] = kFormatVersion;
    j["spec"] = {{"kind", model_name(model.spec.kind)},
                 {"seed", model.spec.seed},
                 {"lr",
                  {{"learning_rate", model.spec.lr.learning_rate},
                   {"epochs", model.spec.lr.epochs},
                   {"l2", model.spec.lr.l2}}},
                 {"bt", {{"rounds", model.spec.bt.rounds}, {"max_depth", model.spec.bt.max_depth}}},
                 {"nn",
                  {{"hidden", model.spec.nn.hidden},
                   {"learning_rate", model.spec.nn.learning_rate},
                   {"epochs", model.spec.nn.epochs},
                   {"batch_size", model.spec.nn.batch_size}}}};
    j["feature_dim"] = model.feature_dim;
    j["transform"] = transform_to_json(model.transform);

    nlohmann::ordered_json params;
    switch (model.spec.kind) {
        case ModelKind::Lr:
            params["lr"] = {{"weights", model.params.lr.weights}, {"bias", model.params.lr.bias}};
            break;
        case ModelKind::Bt: {
            nlohmann::ordered_json trees = nlohmann::ordered_json::array();
            for (const Tree& tree : model.params.bt.trees) trees.push_back(tree_to_json(tree));
            params["bt"] = {{"alphas", model.params.bt.alphas},
                            {"round_errors", model.params.bt.round_errors},
                            {"trees", std::move(trees)}};
            break;
        }
        case ModelKind::Nn: {
            nlohmann::ordered_json weights = nlohmann::ordered_json::array();
            for (const Matrix& w : model.params.nn.weights) {
                weights.push_back({{"rows", w.rows}, {"cols", w.cols}, {"data", w.data}});
            }
            params["nn"] = {{"layer_sizes", model.params.nn.layer_sizes},
                            {"weights", std::move(weights)},
                            {"biases", model.params.nn.biases}};
            break;
        }
    }
    j["params"] = std::move(params);
    j["threshold"] = model.threshold;
    j["metadata"] = {{"training_timestamp", model.metadata.training_timestamp},
                     {"corpus_fingerprint", model.metadata.corpus_fingerprint}};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError("corrupted model file " + path + ": " + e.what());
    }

    try {
        if (!j.is_object() || j.value("format", "") != kFormatName) {
            throw LoadError("not a model artifact: " + path);
        }
        if (j.at("format_version").get<int>() != kFormatVersion) {
            throw LoadError("unsupported model format version " +
                            j.at("format_version").dump() + " in " + path);
        }

        TrainedModel model;
        const nlohmann::json& spec = j.at("spec");
        model.spec.kind = model_from_name(spec.at("kind").get<std::string>());
        model.spec.seed = spec.at("seed").get<std::uint64_t>();
        model.spec.lr.learning_rate = spec.at("lr").at("learning_rate").get<double>();
        model.spec.lr.epochs = spec.at("lr").at("epochs").get<std::size_t>();
        model.spec.lr.l2 = spec.at("lr").at("l2").get<double>();
        model.spec.bt.rounds = spec.at("bt").at("rounds").get<std::size_t>();
        model.spec.bt.max_depth = spec.at("bt").at("max_depth").get<std::size_t>();
        model.spec.nn.hidden = spec.at("nn").at("hidden").get<std::vector<std::size_t>>();
        model.spec.nn.learning_rate = spec.at("nn").at("learning_rate").get<double>();
        model.spec.nn.epochs = spec.at("nn").at("epochs").get<std::size_t>();
        model.spec.nn.batch_size = spec.at("nn").at("batch_size").get<std::size_t>();
        model.feature_dim = j.at("feature_dim").get<std::size_t>();
        model.transform = transform_from_json(j.at("transform"));

        const nlohmann::json& params = j.at("params");
        switch (model.spec.kind) {
            case ModelKind::Lr:
                model.params.lr.weights = params.at("lr").at("weights").get<std::vector<double>>();
                model.params.lr.bias = params.at("lr").at("bias").get<double>();
                break;
            case ModelKind::Bt:
                model.params.bt.alphas = params.at("bt").at("alphas").get<std::vector<double>>();
                model.params.bt.round_errors =
                    params.at("bt").at("round_errors").get<std::vector<double>>();
                for (const nlohmann::json& tree : params.at("bt").at("trees")) {
                    model.params.bt.trees.push_back(tree_from_json(tree));
                }
                break;
            case ModelKind::Nn: {
                model.params.nn.layer_sizes =
                    params.at("nn").at("layer_sizes").get<std::vector<std::size_t>>();
                for (const nlohmann::json& w : params.at("nn").at("weights")) {
                    Matrix m(w.at("rows").get<std::size_t>(), w.at("cols").get<std::size_t>());
                    m.data = w.at("data").get<std::vector<double>>();
                    if (m.data.size() != m.rows * m.cols) {
                        throw LoadError("nn weight matrix shape mismatch in " + path);
                    }
                    model.params.nn.weights.push_back(std::move(m));
                }
                model.params.nn.biases =
                    params.at("nn").at("biases").get<std::vector<std::vector<double>>>();
                break;
            }
        }
        model.threshold = j.at("threshold").get<double>();
        model.metadata.training_timestamp =
            j.at("metadata").at("training_timestamp").get<std::string>();
        model.metadata.corpus_fingerprint =
            j.at("metadata").at("corpus_fingerprint").get<std::string>();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError("malformed model file " + path + ": " + e.what());
    }
}

double lr_log_loss(const LrModel& model, const Matrix& features, const std::vector<int>& labels,
                   double l2) {
    double loss = 0.0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        const double* x = features.row(i);
        double z = model.bias;
        for (std::size_t j = 0; j < features.cols; ++j) z += model.weights[j] * x[j];
        const double y = labels[i] != 0 ? 1.0 : 0.0;
        // Numerically stable log(1 + exp(...)) form.
        loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
    loss /= static_cast<double>(features.rows);
    double reg = 0.0;
    for (double w : model.weights) reg += w * w;
    return loss + 0.5 * l2 * reg;
}

std::pair<std::vector<double>, double> lr_gradient(const LrModel& model, const Matrix& features,
                                                   const std::vector<int>& labels, double l2) {
    std::vector<double> grad(features.cols, 0.0);
    double grad_bias = 0.0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        const double* x = features.row(i);
        double z = model.bias;
        for (std::size_t j = 0; j < features.cols; ++j) z += model.weights[j] * x[j];
        const double err = sigmoid(z) - (labels[i] != 0 ? 1.0 : 0.0);
        for (std::size_t j = 0; j < features.cols; ++j) grad[j] += err * x[j];
        grad_bias += err;
    }
    const double inv_n = 1.0 / static_cast<double>(features.rows);
    for (std::size_t j = 0; j < features.cols; ++j) {
        grad[j] = grad[j] * inv_n + l2 * model.weights[j];
    }
    return {std::move(grad), grad_bias * inv_n};
}

double nn_loss(const NnModel& model, const Matrix& features, const std::vector<int>& labels) {
    double loss = 0.0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        const double p = nn_forward(model, features.row(i));
        const double y = labels[i] != 0 ? 1.0 : 0.0;
        const double eps = 1e-12;
        loss += -(y * std::log(p + eps) + (1.0 - y) * std::log(1.0 - p + eps));
    }
    return loss / static_cast<double>(features.rows);
}

std::vector<double> nn_gradient(const NnModel& model, const Matrix& features,
                                const std::vector<int>& labels) {
    std::vector<Matrix> grad_w;
    std::vector<std::vector<double>> grad_b;
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        grad_w.emplace_back(model.weights[k].rows, model.weights[k].cols);
        grad_b.emplace_back(model.biases[k].size(), 0.0);
    }
    const double scale = 1.0 / static_cast<double>(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) {
        nn_backward_accumulate(model, features.row(i), labels[i] != 0 ? 1.0 : 0.0, scale, grad_w,
                               grad_b);
    }
    std::vector<double> flat;
    for (const Matrix& g : grad_w) flat.insert(flat.end(), g.data.begin(), g.data.end());
    for (const std::vector<double>& g : grad_b) flat.insert(flat.end(), g.begin(), g.end());
    return flat;
}

std::vector<double> nn_flatten(const NnModel& model) {
    std::vector<double> flat;
    for (const Matrix& w : model.weights) flat.insert(flat.end(), w.data.begin(), w.data.end());
    for (const std::vector<double>& b : model.biases) flat.insert(flat.end(), b.begin(), b.end());
    return flat;
}

void nn_unflatten(NnModel& model, const std::vector<double>& flat) {
    std::size_t pos = 0;
    for (Matrix& w : model.weights) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                  flat.begin() + static_cast<std::ptrdiff_t>(pos + w.data.size()), w.data.begin());
        pos += w.data.size();
    }
    for (std::vector<double>& b : model.biases) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                  flat.begin() + static_cast<std::ptrdiff_t>(pos + b.size()), b.begin());
        pos += b.size();
    }
}

std::vector<double> bt_training_error_curve(const BtModel& model, const Matrix& features,
                                            const std::vector<int>& labels) {
    std::vector<double> margins(features.rows, 0.0);
    std::vector<double> errors;
    errors.reserve(model.trees.size());
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < features.rows; ++i) {
            margins[i] += model.alphas[t] * model.trees[t].predict(features.row(i));
            const int pred = margins[i] >= 0.0 ? 1 : 0;
            if (pred != (labels[i] != 0 ? 1 : 0)) ++wrong;
        }
        errors.push_back(static_cast<double>(wrong) / static_cast<double>(features.rows));
    }
    return errors;
}

std::vector<double> bt_training_error_bound_curve(const BtModel& model) {
    std::vector<double> bounds;
    bounds.reserve(model.round_errors.size());
    double bound = 1.0;
    for (double eps : model.round_errors) {
        bound *= 2.0 * std::sqrt(eps * (1.0 - eps));
        bounds.push_back(bound);
    }
    return bounds;
}

Matrix build_feature_matrix(const std::vector<FieldRecord>& records,
                            const FittedTransform& transform) {
    Matrix m(records.size(), transform.dimension());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const FeatureVector fv = transform.apply(records[i]);
        if (fv.values.size() != m.cols) {
            throw ShapeError("transform produced an unexpected feature length");
        }
        std::copy(fv.values.begin(), fv.values.end(), m.row(i));
    }
    return m;
}

std::string corpus_fingerprint(const std::vector<FieldRecord>& records) {
    std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a offset basis
    auto mix = [&hash](const std::string& s) {
        for (unsigned char c : s) {
            hash ^= c;
            hash *= 1099511628211ULL;
        }
        hash ^= 0x1f;
        hash *= 1099511628211ULL;
    };
    for (const FieldRecord& rec : records) {
        mix(rec.command);
        mix(rec.module);
        mix(rec.field_name);
        mix(rec.field_type);
        mix(rec.parent_name);
        mix(rec.parent_type);
        mix(rec.label != 0 ? "1" : "0");
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

}  // namespace cliredact
