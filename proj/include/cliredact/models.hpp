#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cliredact/transforms.hpp"

namespace cliredact {

enum class ModelKind { Lr, Bt, Nn };

const char* model_name(ModelKind kind);
ModelKind model_from_name(const std::string& name);

/// Dense row-major matrix; rows are examples, columns features.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct LrHyperparams {
    double learning_rate = 1.0;
    std::size_t epochs = 2000;
    double l2 = 1e-4;
};

struct BtHyperparams {
    std::size_t rounds = 100;
    std::size_t max_depth = 2;
};

struct NnHyperparams {
    std::vector<std::size_t> hidden = {64};
    double learning_rate = 0.01;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
};

struct ModelSpec {
    ModelKind kind = ModelKind::Lr;
    LrHyperparams lr;
    BtHyperparams bt;
    NnHyperparams nn;
    std::uint64_t seed = 0;
};

struct LrModel {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Axis-aligned decision tree node; feature < 0 marks a leaf. Examples with
/// x[feature] <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    double leaf_value = 0.0;  // -1 or +1
    int left = -1;
    int right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(const double* x) const;
    /// Distinct feature indices this tree splits on.
    std::vector<std::size_t> split_features() const;
};

struct BtModel {
    std::vector<double> alphas;
    std::vector<Tree> trees;
    /// Weighted error of each round's tree on its boosting distribution.
    std::vector<double> round_errors;
};

/// Fully connected network: hidden layers are rectified, the single output
/// unit is a sigmoid probability.
struct NnModel {
    std::vector<std::size_t> layer_sizes;  // input, hidden..., 1
    std::vector<Matrix> weights;           // weights[k]: layer_sizes[k+1] x layer_sizes[k]
    std::vector<std::vector<double>> biases;
};

struct ModelParams {
    LrModel lr;
    BtModel bt;
    NnModel nn;
};

struct ModelMetadata {
    /// Left empty by default so fixed-seed artifacts are byte-identical.
    std::string training_timestamp;
    std::string corpus_fingerprint;
};

/// Serializable classifier artifact: spec, learned parameters, the bound
/// transform, and the decision threshold.
struct TrainedModel {
    ModelSpec spec;
    ModelParams params;
    std::size_t feature_dim = 0;
    FittedTransform transform;
    double threshold = 0.5;
    ModelMetadata metadata;
};

/// Trains the requested model family. Deterministic for a fixed seed. The
/// transform binding and threshold are left for the caller to attach.
/// Throws TrainingError when labels are single-class or fewer than 2 rows,
/// ShapeError when rows and labels disagree.
TrainedModel train(const Matrix& features, const std::vector<int>& labels, const ModelSpec& spec);

/// Probability that the example is sensitive, in [0, 1].
double predict_proba(const TrainedModel& model, const std::vector<double>& features);
double predict_proba(const TrainedModel& model, const double* features, std::size_t n);
std::vector<double> predict_proba_all(const TrainedModel& model, const Matrix& features);

/// Scores a record through the model's bound transform.
double predict_record(const TrainedModel& model, const FieldRecord& record);

struct ImportanceEntry {
    std::size_t feature_index = 0;
    std::string word;
    /// Feature-block name for per-feature transforms, empty otherwise.
    std::string block;
    double weight = 0.0;
};

/// Ranked importances normalized to sum 1 over all features. LR uses
/// absolute weights; BT sums the round weights (alpha) of every round whose
/// tree splits on the feature. Unsupported for NN.
std::vector<ImportanceEntry> feature_importance(const TrainedModel& model, std::size_t top_k);

/// Versioned self-describing artifact file; round-trips losslessly and
/// rejects unknown versions.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

// --- exposed for gradient checking and the harness ---

double lr_log_loss(const LrModel& model, const Matrix& features, const std::vector<int>& labels,
                   double l2);
std::pair<std::vector<double>, double> lr_gradient(const LrModel& model, const Matrix& features,
                                                   const std::vector<int>& labels, double l2);

double nn_loss(const NnModel& model, const Matrix& features, const std::vector<int>& labels);
/// Gradient of nn_loss with respect to all weights then all biases,
/// flattened in layer order.
std::vector<double> nn_gradient(const NnModel& model, const Matrix& features,
                                const std::vector<int>& labels);
std::vector<double> nn_flatten(const NnModel& model);
void nn_unflatten(NnModel& model, const std::vector<double>& flat);

/// Ensemble 0/1 training error after each boosting round.
std::vector<double> bt_training_error_curve(const BtModel& model, const Matrix& features,
                                            const std::vector<int>& labels);

/// The boosting guarantee: prod_t 2*sqrt(eps_t (1 - eps_t)), an upper bound
/// on the ensemble training error that never increases while every round
/// beats chance. The raw 0/1 error can wiggle between rounds; this cannot.
std::vector<double> bt_training_error_bound_curve(const BtModel& model);

/// Builds the feature matrix for a record set under a fitted transform.
Matrix build_feature_matrix(const std::vector<FieldRecord>& records,
                            const FittedTransform& transform);

/// FNV-1a over the record fields; identifies the training corpus in
/// artifact metadata.
std::string corpus_fingerprint(const std::vector<FieldRecord>& records);

}  // namespace cliredact
