#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cliredact/metrics.hpp"
#include "cliredact/models.hpp"
#include "cliredact/schema.hpp"

namespace cliredact {

/// Shape of the synthetic labeled corpus. A field is sensitive when its
/// field_name or parent_name contains one of the stems (case-insensitive
/// substring) and its field_type is string-like; labels are then degraded by
/// dropping a label_noise_rate share of the positives, imitating annotators
/// who miss sensitive fields. Dropping (rather than flipping both ways)
/// keeps the realized positive rate inside the +-20% band the generator
/// promises.
struct CorpusSpec {
    std::size_t record_count = 5000;
    double positive_rate = 0.035;
    std::vector<std::string> sensitive_stems = {"password", "secret",     "key",
                                                "certificate", "connection", "sas",
                                                "token",       "credential"};
    double label_noise_rate = 0.02;
    std::size_t command_pool_size = 100;
    std::uint64_t seed = 0;
};

/// A generated response together with the command that produced it.
struct GeneratedResponse {
    std::string command;
    std::string module;
    ResponseNode root;
};

/// The label rule the generator encodes: stem in field_name or parent_name,
/// and a string-like field_type ("string" appears in the type name,
/// case-insensitively).
bool is_string_like_type(const std::string& type_name);
bool rule_label(const FieldRecord& record, const std::vector<std::string>& stems);

/// Deterministic synthetic responses; flattening them in order yields
/// exactly spec.record_count records.
std::vector<GeneratedResponse> generate_responses(const CorpusSpec& spec);

/// Flattens generated responses, applies the label rule, then drops a
/// round(positives * label_noise_rate) sample of positive labels.
std::vector<FieldRecord> generate_corpus(const CorpusSpec& spec);
std::vector<FieldRecord> generate_corpus(const CorpusSpec& spec,
                                         std::vector<GeneratedResponse>* responses_out);

/// Command-grouped dataset split: every record of a command lands in the
/// partition holding that command.
struct SplitPlan {
    std::set<std::string> train;
    std::set<std::string> tune;
    std::set<std::string> validate;
    std::array<double, 3> ratios{0.8, 0.1, 0.1};
    std::uint64_t seed = 0;
};

SplitPlan split_by_command(const std::vector<FieldRecord>& records,
                           const std::array<double, 3>& ratios, std::uint64_t seed);

/// Record indices per partition, in corpus order.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> tune;
    std::vector<std::size_t> validate;
};
SplitIndices partition_records(const std::vector<FieldRecord>& records, const SplitPlan& plan);

/// Welch's two-sided t-test p-value; 1.0 when both samples are constant and
/// equal, 0.0 when both are constant but different.
double significance(const std::vector<double>& runs_a, const std::vector<double>& runs_b);

struct ExperimentConfig {
    std::vector<TransformKind> transforms = {TransformKind::Bow, TransformKind::Tfidf,
                                             TransformKind::We, TransformKind::BowPf,
                                             TransformKind::TfidfPf};
    std::vector<ModelKind> models = {ModelKind::Lr, ModelKind::Bt, ModelKind::Nn};
    std::size_t repetitions = 20;
    std::uint64_t seed = 0;
    std::array<double, 3> ratios{0.8, 0.1, 0.1};
    /// When true every repetition re-seeds the command split as well;
    /// default keeps the split fixed so cell comparisons are paired.
    bool reshuffle_splits = false;
    /// Retain each repetition's tune-split sweep curve in the report so
    /// callers can export per-run curve CSVs.
    bool keep_curves = false;
    MetricConfig metric;
    ModelSpec base_model_spec;  // hyperparameters shared by every cell
    TransformConfig we_config;
    EmbeddingTrainConfig embedding_training;
    TokenizerConfig tokenizer;
};

struct RunResult {
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    double max_f5_tune = 0.0;
    double threshold = 0.0;
    double f5_validation = 0.0;
    double precision_validation = 0.0;
    double recall_validation = 0.0;
    double auc_validation = 0.0;
    double plateau_width_tune = 0.0;
    std::int64_t runtime_ms = 0;
    /// Leakage audit: documents the transform was fitted on vs. the train
    /// split size. These must match.
    std::size_t fitted_doc_count = 0;
    std::size_t train_split_size = 0;
    /// Filled only when ExperimentConfig::keep_curves is set.
    std::vector<EvalPoint> tune_curve;
};

struct CellResult {
    TransformKind transform = TransformKind::Bow;
    ModelKind model = ModelKind::Lr;
    std::size_t feature_dim = 0;
    std::vector<RunResult> runs;
    double mean_max_f5_tune = 0.0;
    double mean_f5_validation = 0.0;
    double std_f5_validation = 0.0;
    /// Cell-level failure message; empty when the cell ran.
    std::string error;
};

struct PairwiseSignificance {
    std::size_t cell_a = 0;
    std::size_t cell_b = 0;
    double p_value = 1.0;
};

struct FeatureSizeEntry {
    TransformKind transform = TransformKind::Bow;
    std::size_t dimension = 0;
};

struct ExperimentReport {
    std::vector<CellResult> cells;
    std::vector<PairwiseSignificance> pairwise;
    std::vector<FeatureSizeEntry> feature_sizes;
    std::array<double, 3> ratios{0.8, 0.1, 0.1};
    std::size_t repetitions = 0;
    std::uint64_t seed = 0;
    std::int64_t runtime_ms = 0;
    std::string corpus_fingerprint;
};

/// Runs the transform x model grid: per repetition, fit transforms on the
/// train split only, train the model, pick the max-F5 threshold on the tune
/// split, and report F5 at that threshold on the validation split. A cell
/// failure is recorded in its error field without aborting other cells.
ExperimentReport run_experiment(const std::vector<FieldRecord>& records,
                                const ExperimentConfig& config);

/// Summary CSV: one row per run, columns transform,model,repetition,seed,
/// max_f5_tune,threshold,f5_validation,precision_validation,
/// recall_validation,auc_validation,runtime_ms.
void write_summary_csv(const ExperimentReport& report, const std::string& path);

/// Report metadata (corpus spec if known, ratios, hyperparameters, format
/// version, metric conventions) plus the full per-run results.
void write_report_json(const ExperimentReport& report, const ExperimentConfig& config,
                       const std::optional<CorpusSpec>& corpus_spec, const std::string& path);

}  // namespace cliredact
