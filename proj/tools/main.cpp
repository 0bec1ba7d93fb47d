#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cliredact/embeddings.hpp"
#include "cliredact/errors.hpp"
#include "cliredact/harness.hpp"
#include "cliredact/metrics.hpp"
#include "cliredact/models.hpp"
#include "cliredact/redactor.hpp"
#include "cliredact/schema.hpp"
#include "cliredact/tokenizer.hpp"
#include "cliredact/transforms.hpp"

namespace {

using namespace cliredact;

std::array<double, 3> parse_ratios(const std::vector<double>& values) {
    if (values.size() != 3) throw ConfigError("--ratios needs exactly 3 values, e.g. 0.8,0.1,0.1");
    return {values[0], values[1], values[2]};
}

CorpusSpec corpus_spec_from_flags(std::size_t records, double positive_rate, double noise,
                                  std::size_t commands, const std::vector<std::string>& stems,
                                  std::uint64_t seed) {
    CorpusSpec spec;
    spec.record_count = records;
    spec.positive_rate = positive_rate;
    spec.label_noise_rate = noise;
    spec.command_pool_size = commands;
    if (!stems.empty()) spec.sensitive_stems = stems;
    spec.seed = seed;
    return spec;
}

struct TrainFlags {
    std::string corpus_path;
    std::string transform = "bow-pf";
    std::string model = "lr";
    std::string out_path;
    std::string embeddings_path;
    std::uint64_t seed = 0;
    std::vector<double> ratios = {0.8, 0.1, 0.1};
    double beta = 5.0;
    std::size_t we_max_words = 78;
    std::size_t we_dims = 20;
    ModelSpec spec;
    EmbeddingTrainConfig embedding_training;
};

void run_train(const TrainFlags& flags) {
    const std::vector<FieldRecord> records = load_corpus(flags.corpus_path);
    const SplitPlan plan = split_by_command(records, parse_ratios(flags.ratios), flags.seed);
    const SplitIndices indices = partition_records(records, plan);

    auto gather = [&](const std::vector<std::size_t>& idx) {
        std::vector<FieldRecord> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(records[i]);
        return out;
    };
    const std::vector<FieldRecord> train_records = gather(indices.train);
    const std::vector<FieldRecord> tune_records = gather(indices.tune);
    const std::vector<FieldRecord> validate_records = gather(indices.validate);

    FitOptions fit_options;
    fit_options.transform.kind = transform_from_name(flags.transform);
    fit_options.transform.max_words = flags.we_max_words;
    fit_options.transform.dims_per_word = flags.we_dims;
    fit_options.embedding_training = flags.embedding_training;
    fit_options.embedding_training.dimensions = flags.we_dims;
    fit_options.embedding_training.seed = flags.seed;
    if (!flags.embeddings_path.empty()) {
        fit_options.pretrained_embeddings = load_embeddings(flags.embeddings_path);
    }
    const FittedTransform fitted = fit_transform(train_records, fit_options);

    auto labels_of = [](const std::vector<FieldRecord>& recs) {
        std::vector<int> labels;
        labels.reserve(recs.size());
        for (const FieldRecord& rec : recs) labels.push_back(rec.label);
        return labels;
    };

    ModelSpec spec = flags.spec;
    spec.kind = model_from_name(flags.model);
    spec.seed = flags.seed;
    TrainedModel model = train(build_feature_matrix(train_records, fitted),
                               labels_of(train_records), spec);
    model.transform = fitted;
    model.metadata.corpus_fingerprint = corpus_fingerprint(records);

    const std::vector<double> tune_scores =
        predict_proba_all(model, build_feature_matrix(tune_records, fitted));
    MetricConfig metric;
    metric.beta = flags.beta;
    const SweepResult tune_sweep = sweep(tune_scores, labels_of(tune_records), metric);
    model.threshold = tune_sweep.max_point.threshold;

    const std::vector<double> val_scores =
        predict_proba_all(model, build_feature_matrix(validate_records, fitted));
    const std::vector<int> val_labels = labels_of(validate_records);
    std::size_t tp = 0, fp = 0, positives = 0;
    for (std::size_t i = 0; i < val_scores.size(); ++i) {
        positives += val_labels[i] != 0 ? 1 : 0;
        if (val_scores[i] >= model.threshold) (val_labels[i] != 0 ? tp : fp) += 1;
    }
    const double precision =
        tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall =
        positives == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(positives);

    save_model(model, flags.out_path);
    std::printf("trained %s on %s: dim=%zu train=%zu tune=%zu validate=%zu\n",
                model_name(spec.kind), transform_name(fitted.config.kind), fitted.dimension(),
                train_records.size(), tune_records.size(), validate_records.size());
    std::printf("tune: max F%.0f=%.6f at threshold %.6f (plateau width %.6f)\n", flags.beta,
                tune_sweep.max_point.fbeta, tune_sweep.max_point.threshold,
                tune_sweep.plateau_width);
    std::printf("validation: F%.0f=%.6f precision=%.6f recall=%.6f\n", flags.beta,
                fbeta_score(precision, recall, flags.beta), precision, recall);
    std::printf("saved model to %s\n", flags.out_path.c_str());
}

void print_report_table(const ExperimentReport& report) {
    std::printf("%-10s %-5s %-8s %-18s %-18s %s\n", "transform", "model", "dim",
                "mean_max_f5_tune", "mean_f5_validation", "std_f5_validation");
    for (const CellResult& cell : report.cells) {
        if (!cell.error.empty()) {
            std::printf("%-10s %-5s failed: %s\n", transform_name(cell.transform),
                        model_name(cell.model), cell.error.c_str());
            continue;
        }
        std::printf("%-10s %-5s %-8zu %-18.6f %-18.6f %.6f\n", transform_name(cell.transform),
                    model_name(cell.model), cell.feature_dim, cell.mean_max_f5_tune,
                    cell.mean_f5_validation, cell.std_f5_validation);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensitive-field prediction and redaction for structured CLI responses"};
    app.require_subcommand(1);

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic labeled corpus (JSONL)");
    std::size_t gen_records = 5000;
    double gen_positive_rate = 0.035;
    double gen_noise = 0.02;
    std::size_t gen_commands = 100;
    std::vector<std::string> gen_stems;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    std::string gen_responses_dir;
    gen->add_option("--records", gen_records, "Number of field records")->required();
    gen->add_option("--seed", gen_seed, "RNG seed")->default_val(0);
    gen->add_option("--out", gen_out, "Output corpus path (JSONL)")->required();
    gen->add_option("--positive-rate", gen_positive_rate, "Sensitive-field rate")
        ->default_val(0.035);
    gen->add_option("--noise", gen_noise, "Share of positive labels dropped")->default_val(0.02);
    gen->add_option("--commands", gen_commands, "Command pool size")->default_val(100);
    gen->add_option("--stems", gen_stems, "Sensitive stems (comma separated)")->delimiter(',');
    gen->add_option("--responses-dir", gen_responses_dir,
                    "Also write each generated response tree as JSON into this directory");
    std::string gen_spec_out;
    gen->add_option("--spec-out", gen_spec_out,
                    "Write the corpus spec as JSON (feed to evaluate --corpus-spec)");
    gen->callback([&]() {
        const CorpusSpec spec = corpus_spec_from_flags(gen_records, gen_positive_rate, gen_noise,
                                                       gen_commands, gen_stems, gen_seed);
        if (!gen_spec_out.empty()) {
            nlohmann::ordered_json j;
            j["record_count"] = spec.record_count;
            j["positive_rate"] = spec.positive_rate;
            j["sensitive_stems"] = spec.sensitive_stems;
            j["label_noise_rate"] = spec.label_noise_rate;
            j["command_pool_size"] = spec.command_pool_size;
            j["seed"] = spec.seed;
            std::ofstream out(gen_spec_out, std::ios::binary);
            if (!out) throw ParseError("cannot open file for writing: " + gen_spec_out);
            out << j.dump(2) << "\n";
        }
        std::vector<GeneratedResponse> responses;
        const std::vector<FieldRecord> records = generate_corpus(spec, &responses);
        save_corpus(records, gen_out);
        std::size_t positives = 0;
        for (const FieldRecord& rec : records) positives += static_cast<std::size_t>(rec.label);
        std::printf("wrote %zu records (%zu positive, %.4f) to %s\n", records.size(), positives,
                    static_cast<double>(positives) / static_cast<double>(records.size()),
                    gen_out.c_str());
        if (!gen_responses_dir.empty()) {
            std::filesystem::create_directories(gen_responses_dir);
            for (std::size_t i = 0; i < responses.size(); ++i) {
                char name[64];
                std::snprintf(name, sizeof(name), "response_%05zu.json", i);
                nlohmann::ordered_json j;
                j["command"] = responses[i].command;
                j["module"] = responses[i].module;
                j["response"] = response_to_json(responses[i].root);
                std::ofstream out(std::filesystem::path(gen_responses_dir) / name,
                                  std::ios::binary);
                out << j.dump(2) << "\n";
            }
            std::printf("wrote %zu response trees to %s\n", responses.size(),
                        gen_responses_dir.c_str());
        }
    });

    // tokenize
    auto* tok = app.add_subcommand("tokenize", "Split an identifier string into tokens");
    std::string tok_input;
    bool tok_keep_case = false;
    tok->add_option("input", tok_input, "String to tokenize")->required();
    tok->add_flag("--keep-case", tok_keep_case, "Do not lowercase tokens");
    tok->callback([&]() {
        TokenizerConfig config;
        config.lowercase_output = !tok_keep_case;
        for (const std::string& token : Tokenizer(config).tokenize(tok_input)) {
            std::printf("%s\n", token.c_str());
        }
    });

    // train-embeddings
    auto* emb = app.add_subcommand("train-embeddings",
                                   "Train word embeddings on a corpus's rendered documents");
    std::string emb_corpus, emb_out;
    EmbeddingTrainConfig emb_config;
    emb->add_option("--corpus", emb_corpus, "Corpus path (JSONL)")->required();
    emb->add_option("--out", emb_out, "Output embedding file")->required();
    emb->add_option("--dims", emb_config.dimensions, "Vector dimensions")->default_val(20);
    emb->add_option("--window", emb_config.window, "Context window")->default_val(3);
    emb->add_option("--negatives", emb_config.negatives, "Negative samples")->default_val(5);
    emb->add_option("--epochs", emb_config.epochs, "Training epochs")->default_val(15);
    emb->add_option("--learning-rate", emb_config.learning_rate, "Initial learning rate")
        ->default_val(0.025);
    emb->add_option("--seed", emb_config.seed, "RNG seed")->default_val(0);
    emb->callback([&]() {
        const std::vector<FieldRecord> records = load_corpus(emb_corpus);
        const Tokenizer tokenizer;
        std::vector<Document> docs;
        docs.reserve(records.size());
        for (const FieldRecord& rec : records) docs.push_back(record_document(rec, tokenizer));
        const EmbeddingTable table = train_embeddings(docs, emb_config);
        save_embeddings(table, emb_out);
        std::printf("trained %zu word vectors (dim %zu) on %zu documents -> %s\n", table.size(),
                    table.dimension(), docs.size(), emb_out.c_str());
    });

    // train
    auto* tr = app.add_subcommand("train", "Train one transform x model pair and save the artifact");
    TrainFlags train_flags;
    tr->add_option("--corpus", train_flags.corpus_path, "Corpus path (JSONL)")->required();
    tr->add_option("--transform", train_flags.transform,
                   "Transform: bow, tfidf, we, bow-pf, tfidf-pf")
        ->default_val("bow-pf");
    tr->add_option("--model", train_flags.model, "Model: lr, bt, nn")->default_val("lr");
    tr->add_option("--out", train_flags.out_path, "Output model artifact path")->required();
    tr->add_option("--seed", train_flags.seed, "RNG seed")->default_val(0);
    tr->add_option("--ratios", train_flags.ratios, "Train/tune/validate ratios")->delimiter(',');
    tr->add_option("--beta", train_flags.beta, "F-beta weighting")->default_val(5.0);
    tr->add_option("--we-max-words", train_flags.we_max_words, "WE: words kept per document")
        ->default_val(78);
    tr->add_option("--we-dims", train_flags.we_dims, "WE: dimensions per word")->default_val(20);
    tr->add_option("--embeddings", train_flags.embeddings_path,
                   "WE: pretrained embedding file (otherwise trained on the train split)");
    tr->add_option("--lr-rate", train_flags.spec.lr.learning_rate, "LR learning rate")
        ->default_val(1.0);
    tr->add_option("--lr-epochs", train_flags.spec.lr.epochs, "LR epochs")->default_val(2000);
    tr->add_option("--lr-l2", train_flags.spec.lr.l2, "LR L2 strength")->default_val(1e-4);
    tr->add_option("--bt-rounds", train_flags.spec.bt.rounds, "BT boosting rounds")
        ->default_val(100);
    tr->add_option("--bt-depth", train_flags.spec.bt.max_depth, "BT tree depth")->default_val(2);
    tr->add_option("--nn-hidden", train_flags.spec.nn.hidden, "NN hidden layer sizes")
        ->delimiter(',');
    tr->add_option("--nn-rate", train_flags.spec.nn.learning_rate, "NN learning rate")
        ->default_val(0.01);
    tr->add_option("--nn-epochs", train_flags.spec.nn.epochs, "NN epochs")->default_val(50);
    tr->add_option("--nn-batch", train_flags.spec.nn.batch_size, "NN batch size")->default_val(32);
    tr->callback([&]() { run_train(train_flags); });

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Run the transform x model experiment grid");
    std::string ev_corpus, ev_summary, ev_report, ev_curves_dir;
    std::vector<std::string> ev_transforms = {"bow", "tfidf", "we", "bow-pf", "tfidf-pf"};
    std::vector<std::string> ev_models = {"lr", "bt", "nn"};
    ExperimentConfig ev_config;
    std::vector<double> ev_ratios = {0.8, 0.1, 0.1};
    ev->add_option("--corpus", ev_corpus, "Corpus path (JSONL)")->required();
    ev->add_option("--transforms", ev_transforms, "Transforms to run")->delimiter(',');
    ev->add_option("--models", ev_models, "Models to run")->delimiter(',');
    ev->add_option("--reps", ev_config.repetitions, "Repetitions per cell")->default_val(20);
    ev->add_option("--seed", ev_config.seed, "Master seed")->default_val(0);
    ev->add_option("--ratios", ev_ratios, "Train/tune/validate ratios")->delimiter(',');
    ev->add_flag("--reshuffle-splits", ev_config.reshuffle_splits,
                 "Re-seed the command split every repetition");
    ev->add_option("--beta", ev_config.metric.beta, "F-beta weighting")->default_val(5.0);
    ev->add_option("--recall-floor", ev_config.metric.recall_floor, "Recall floor metadata")
        ->default_val(0.99);
    ev->add_option("--out-summary", ev_summary, "Summary CSV path");
    ev->add_option("--out-report", ev_report, "Report JSON path");
    std::string ev_corpus_spec;
    ev->add_option("--corpus-spec", ev_corpus_spec,
                   "Corpus spec JSON (from gen-corpus --spec-out) to embed in the report");
    ev->add_option("--curves-dir", ev_curves_dir,
                   "Write one tune-split curve CSV per (transform, model, repetition)");
    ev->add_option("--we-max-words", ev_config.we_config.max_words, "WE: words per document")
        ->default_val(78);
    ev->add_option("--we-dims", ev_config.we_config.dims_per_word, "WE: dims per word")
        ->default_val(20);
    ev->callback([&]() {
        ev_config.ratios = parse_ratios(ev_ratios);
        ev_config.transforms.clear();
        for (const std::string& name : ev_transforms) {
            ev_config.transforms.push_back(transform_from_name(name));
        }
        ev_config.models.clear();
        for (const std::string& name : ev_models) {
            ev_config.models.push_back(model_from_name(name));
        }
        ev_config.keep_curves = !ev_curves_dir.empty();
        const std::vector<FieldRecord> records = load_corpus(ev_corpus);
        const ExperimentReport report = run_experiment(records, ev_config);
        print_report_table(report);
        if (!ev_summary.empty()) {
            write_summary_csv(report, ev_summary);
            std::printf("summary csv -> %s\n", ev_summary.c_str());
        }
        if (!ev_report.empty()) {
            std::optional<CorpusSpec> corpus_spec;
            if (!ev_corpus_spec.empty()) {
                std::ifstream in(ev_corpus_spec);
                if (!in) throw ParseError("cannot open corpus spec file: " + ev_corpus_spec);
                nlohmann::json j;
                try {
                    in >> j;
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError("invalid corpus spec JSON: " + std::string(e.what()));
                }
                CorpusSpec parsed;
                parsed.record_count = j.value("record_count", parsed.record_count);
                parsed.positive_rate = j.value("positive_rate", parsed.positive_rate);
                if (j.contains("sensitive_stems")) {
                    parsed.sensitive_stems =
                        j["sensitive_stems"].get<std::vector<std::string>>();
                }
                parsed.label_noise_rate = j.value("label_noise_rate", parsed.label_noise_rate);
                parsed.command_pool_size = j.value("command_pool_size", parsed.command_pool_size);
                parsed.seed = j.value("seed", parsed.seed);
                corpus_spec = parsed;
            }
            write_report_json(report, ev_config, corpus_spec, ev_report);
            std::printf("report json -> %s\n", ev_report.c_str());
        }
        if (!ev_curves_dir.empty()) {
            std::filesystem::create_directories(ev_curves_dir);
            for (const CellResult& cell : report.cells) {
                for (const RunResult& run : cell.runs) {
                    char name[128];
                    std::snprintf(name, sizeof(name), "curve_%s_%s_rep%02zu.csv",
                                  transform_name(cell.transform), model_name(cell.model),
                                  run.repetition);
                    write_curve_csv(run.tune_curve,
                                    (std::filesystem::path(ev_curves_dir) / name).string());
                }
            }
            std::printf("curve csvs -> %s\n", ev_curves_dir.c_str());
        }
    });

    // sweep
    auto* sw = app.add_subcommand("sweep", "Score a corpus with a model and sweep thresholds");
    std::string sw_model, sw_corpus, sw_out;
    double sw_beta = 5.0;
    sw->add_option("--model", sw_model, "Model artifact path")->required();
    sw->add_option("--corpus", sw_corpus, "Corpus path (JSONL)")->required();
    sw->add_option("--out", sw_out, "Curve CSV path");
    sw->add_option("--beta", sw_beta, "F-beta weighting")->default_val(5.0);
    sw->callback([&]() {
        const TrainedModel model = load_model(sw_model);
        const std::vector<FieldRecord> records = load_corpus(sw_corpus);
        std::vector<double> scores;
        std::vector<int> labels;
        scores.reserve(records.size());
        for (const FieldRecord& rec : records) {
            scores.push_back(predict_record(model, rec));
            labels.push_back(rec.label);
        }
        MetricConfig metric;
        metric.beta = sw_beta;
        const SweepResult result = sweep(scores, labels, metric);
        std::printf("max F%.0f=%.6f at threshold %.6f (precision %.6f, recall %.6f, "
                    "plateau width %.6f, %zu curve points)\n",
                    sw_beta, result.max_point.fbeta, result.max_point.threshold,
                    result.max_point.precision, result.max_point.recall, result.plateau_width,
                    result.curve.size());
        if (!sw_out.empty()) {
            write_curve_csv(result.curve, sw_out);
            std::printf("curve csv -> %s\n", sw_out.c_str());
        }
    });

    // redact
    auto* rd = app.add_subcommand("redact", "Redact a response tree with a trained model");
    std::string rd_model, rd_response, rd_command, rd_module, rd_out;
    double rd_threshold = -1.0;
    bool rd_has_threshold = false;
    rd->add_option("--model", rd_model, "Model artifact path")->required();
    rd->add_option("--response", rd_response, "Response JSON path")->required();
    rd->add_option("--command", rd_command,
                   "Command that produced the response (read from the file when it carries one)");
    rd->add_option("--module", rd_module, "Module of the command")->default_val("");
    rd->add_option("--threshold", rd_threshold, "Override the artifact's decision threshold")
        ->check(CLI::Range(0.0, 2.0))
        ->each([&](const std::string&) { rd_has_threshold = true; });
    rd->add_option("--out", rd_out, "Output path (default: stdout)");
    rd->callback([&]() {
        const TrainedModel model = load_model(rd_model);

        // The file is either a bare response tree or the wrapper
        // {command, module, response} that gen-corpus --responses-dir emits.
        std::ifstream in(rd_response);
        if (!in) throw ParseError("cannot open response file: " + rd_response);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("invalid response JSON in " + rd_response + ": " + e.what());
        }
        std::string command = rd_command;
        std::string module = rd_module;
        ResponseNode response;
        if (j.is_object() && j.contains("response")) {
            if (command.empty()) command = j.value("command", "");
            if (module.empty()) module = j.value("module", "");
            response = response_from_json(j["response"]);
        } else {
            response = response_from_json(j);
        }
        if (command.empty()) {
            throw CLI::ValidationError(
                "redact", "the response file carries no command; pass --command");
        }
        const RedactionResult result =
            redact(response, command, module, model,
                   rd_has_threshold ? std::optional<double>(rd_threshold) : std::nullopt);
        const std::string payload = redaction_result_to_json(result).dump(2);
        if (rd_out.empty()) {
            std::printf("%s\n", payload.c_str());
        } else {
            std::ofstream out(rd_out, std::ios::binary);
            if (!out) throw ParseError("cannot open file for writing: " + rd_out);
            out << payload << "\n";
            std::size_t redacted = 0;
            for (const AuditEntry& entry : result.audit) {
                redacted += entry.action == "redact" ? 1 : 0;
            }
            std::printf("redacted %zu of %zu fields -> %s\n", redacted, result.audit.size(),
                        rd_out.c_str());
        }
    });

    // inspect-model
    auto* im = app.add_subcommand("inspect-model", "Print a model artifact's spec and importances");
    std::string im_model;
    std::size_t im_top = 10;
    im->add_option("--model", im_model, "Model artifact path")->required();
    im->add_option("--top", im_top, "Importance entries to print")->default_val(10);
    im->callback([&]() {
        const TrainedModel model = load_model(im_model);
        std::printf("kind: %s\n", model_name(model.spec.kind));
        std::printf("seed: %llu\n", static_cast<unsigned long long>(model.spec.seed));
        std::printf("transform: %s\n", transform_name(model.transform.config.kind));
        std::printf("feature_dim: %zu\n", model.feature_dim);
        std::printf("vocabulary: %zu terms over %zu fitted documents\n",
                    model.transform.vocabulary.size(), model.transform.fitted_doc_count);
        if (model.transform.config.kind == TransformKind::We) {
            std::printf("embeddings: %zu words x %zu dims (max %zu words per document)\n",
                        model.transform.embeddings.size(), model.transform.embeddings.dimension(),
                        model.transform.config.max_words);
        }
        std::printf("threshold: %.6f\n", model.threshold);
        std::printf("corpus_fingerprint: %s\n", model.metadata.corpus_fingerprint.c_str());
        switch (model.spec.kind) {
            case ModelKind::Lr:
                std::printf("lr: learning_rate=%g epochs=%zu l2=%g\n",
                            model.spec.lr.learning_rate, model.spec.lr.epochs, model.spec.lr.l2);
                break;
            case ModelKind::Bt:
                std::printf("bt: rounds=%zu (trained %zu) depth=%zu\n", model.spec.bt.rounds,
                            model.params.bt.trees.size(), model.spec.bt.max_depth);
                break;
            case ModelKind::Nn: {
                std::string sizes;
                for (std::size_t s : model.params.nn.layer_sizes) {
                    if (!sizes.empty()) sizes += "-";
                    sizes += std::to_string(s);
                }
                std::printf("nn: layers=%s learning_rate=%g epochs=%zu batch=%zu\n", sizes.c_str(),
                            model.spec.nn.learning_rate, model.spec.nn.epochs,
                            model.spec.nn.batch_size);
                break;
            }
        }
        if (model.spec.kind == ModelKind::Nn) {
            std::printf("importances: unsupported for nn\n");
        } else {
            std::printf("top %zu importances:\n", im_top);
            for (const ImportanceEntry& entry : feature_importance(model, im_top)) {
                if (entry.block.empty()) {
                    std::printf("  %-24s %.6f\n", entry.word.c_str(), entry.weight);
                } else {
                    std::printf("  %-12s %-24s %.6f\n", entry.block.c_str(), entry.word.c_str(),
                                entry.weight);
                }
            }
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help and friends
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
