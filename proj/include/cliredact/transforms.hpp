#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cliredact/embeddings.hpp"
#include "cliredact/schema.hpp"
#include "cliredact/tokenizer.hpp"

namespace cliredact {

enum class TransformKind { Bow, Tfidf, We, BowPf, TfidfPf };

const char* transform_name(TransformKind kind);
TransformKind transform_from_name(const std::string& name);

/// Term -> index map over the distinct tokens of a fitted corpus. Terms are
/// kept in lexicographic order so artifacts are identical across runs and
/// platforms.
struct Vocabulary {
    std::vector<std::string> terms;
    std::unordered_map<std::string, std::size_t> index;

    std::size_t size() const { return terms.size(); }
    /// Index of a term, or nullopt when out of vocabulary.
    std::optional<std::size_t> find(const std::string& term) const;
};

/// Per-term document counts (n_t) plus the fitted corpus size (N).
/// doc_count is aligned with Vocabulary::terms.
struct DocumentFrequencyTable {
    std::vector<std::size_t> doc_count;
    std::size_t total_docs = 0;
};

/// Fixed-length numeric vector emitted by a transform.
struct FeatureVector {
    std::vector<double> values;
    TransformKind layout_tag = TransformKind::Bow;
};

struct TransformConfig {
    TransformKind kind = TransformKind::Bow;
    /// WE only: words kept per document and dims per word.
    std::size_t max_words = 78;
    std::size_t dims_per_word = 20;
};

/// Builds the vocabulary and document-frequency table from a corpus.
/// N is the corpus size; n_t counts documents (not occurrences) containing
/// each term. The corpus must be non-empty.
std::pair<Vocabulary, DocumentFrequencyTable> fit_vocabulary(const std::vector<Document>& corpus);

/// Raw occurrence counts over the vocabulary; OOV tokens are ignored.
FeatureVector bow_transform(const Document& doc, const Vocabulary& vocab);

/// Count of `term` in `doc` divided by the token count of `doc`; 0 for an
/// empty document.
double term_frequency(const std::string& term, const Document& doc);

/// tf(t, doc) * ln(N / n_t) per vocabulary slot. Terms present in every
/// fitted document get exactly 0; OOV tokens are ignored.
FeatureVector tfidf_transform(const Document& doc, const Vocabulary& vocab,
                              const DocumentFrequencyTable& df);

/// Concatenates per-word embedding vectors: word j (0-based, j < max_words)
/// occupies [j*l, (j+1)*l). Extra words are dropped; OOV words leave zeros.
FeatureVector we_transform(const Document& doc, const EmbeddingTable& table,
                           std::size_t max_words, std::size_t dims_per_word);

/// Applies bow or tfidf independently to each of the six per-feature
/// documents and concatenates in canonical feature order. The vocabulary and
/// df come from the whole rendered documents, so the output has 6*|vocab|
/// entries with block k spanning [k*|vocab|, (k+1)*|vocab|).
FeatureVector per_feature_transform(const std::array<Document, 6>& features, TransformKind base,
                                    const Vocabulary& vocab, const DocumentFrequencyTable& df);
FeatureVector per_feature_transform(const FieldRecord& record, const Tokenizer& tokenizer,
                                    TransformKind base, const Vocabulary& vocab,
                                    const DocumentFrequencyTable& df);

/// A fitted transform bound to everything needed to featurize a record:
/// the kind, the tokenizer settings, the vocabulary/df fitted on the
/// training documents, and (for WE) the embedding table. This is the
/// transform descriptor embedded in model artifacts.
struct FittedTransform {
    TransformConfig config;
    TokenizerConfig tokenizer_config;
    Vocabulary vocabulary;
    DocumentFrequencyTable df;
    EmbeddingTable embeddings;
    /// Documents seen while fitting (equals df.total_docs for vocabulary
    /// transforms); kept for leakage audits.
    std::size_t fitted_doc_count = 0;

    std::size_t dimension() const;
    FeatureVector apply(const FieldRecord& record) const;
};

struct FitOptions {
    TransformConfig transform;
    TokenizerConfig tokenizer;
    /// WE only: when no table is supplied, one is trained on the fit corpus
    /// with these settings.
    EmbeddingTrainConfig embedding_training;
    std::optional<EmbeddingTable> pretrained_embeddings;
};

/// Fits a transform on training records only (the rendered whole documents).
FittedTransform fit_transform(const std::vector<FieldRecord>& records, const FitOptions& options);

}  // namespace cliredact
