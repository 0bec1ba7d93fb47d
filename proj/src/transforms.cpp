#include "cliredact/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cliredact/errors.hpp"

namespace cliredact {

const char* transform_name(TransformKind kind) {
    switch (kind) {
        case TransformKind::Bow: return "bow";
        case TransformKind::Tfidf: return "tfidf";
        case TransformKind::We: return "we";
        case TransformKind::BowPf: return "bow-pf";
        case TransformKind::TfidfPf: return "tfidf-pf";
    }
    return "unknown";
}

TransformKind transform_from_name(const std::string& name) {
    if (name == "bow") return TransformKind::Bow;
    if (name == "tfidf") return TransformKind::Tfidf;
    if (name == "we") return TransformKind::We;
    if (name == "bow-pf" || name == "bow_pf") return TransformKind::BowPf;
    if (name == "tfidf-pf" || name == "tfidf_pf") return TransformKind::TfidfPf;
    throw ConfigError("unknown transform: " + name);
}

std::optional<std::size_t> Vocabulary::find(const std::string& term) const {
    auto it = index.find(term);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

std::pair<Vocabulary, DocumentFrequencyTable> fit_vocabulary(const std::vector<Document>& corpus) {
    if (corpus.empty()) {
        throw TrainingError("cannot fit a vocabulary on an empty corpus");
    }
    std::set<std::string> distinct;
    for (const Document& doc : corpus) {
        distinct.insert(doc.begin(), doc.end());
    }
    Vocabulary vocab;
    vocab.terms.assign(distinct.begin(), distinct.end());
    vocab.index.reserve(vocab.terms.size());
    for (std::size_t i = 0; i < vocab.terms.size(); ++i) {
        vocab.index.emplace(vocab.terms[i], i);
    }

    DocumentFrequencyTable df;
    df.total_docs = corpus.size();
    df.doc_count.assign(vocab.size(), 0);
    std::vector<std::size_t> seen;
    for (const Document& doc : corpus) {
        seen.clear();
        for (const std::string& token : doc) {
            seen.push_back(vocab.index.at(token));
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (std::size_t idx : seen) ++df.doc_count[idx];
    }
    return {std::move(vocab), std::move(df)};
}

FeatureVector bow_transform(const Document& doc, const Vocabulary& vocab) {
    FeatureVector out;
    out.layout_tag = TransformKind::Bow;
    out.values.assign(vocab.size(), 0.0);
    for (const std::string& token : doc) {
        if (auto idx = vocab.find(token)) {
            out.values[*idx] += 1.0;
        }
    }
    return out;
}

double term_frequency(const std::string& term, const Document& doc) {
    if (doc.empty()) return 0.0;
    std::size_t count = 0;
    for (const std::string& token : doc) {
        if (token == term) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(doc.size());
}

FeatureVector tfidf_transform(const Document& doc, const Vocabulary& vocab,
                              const DocumentFrequencyTable& df) {
    if (df.doc_count.size() != vocab.size()) {
        throw ShapeError("document-frequency table does not match the vocabulary");
    }
    FeatureVector out;
    out.layout_tag = TransformKind::Tfidf;
    out.values.assign(vocab.size(), 0.0);
    if (doc.empty()) return out;

    // Single pass: raw counts first, then scale occupied slots by idf.
    for (const std::string& token : doc) {
        if (auto idx = vocab.find(token)) {
            out.values[*idx] += 1.0;
        }
    }
    const double doc_len = static_cast<double>(doc.size());
    const double total = static_cast<double>(df.total_docs);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        if (out.values[i] == 0.0) continue;
        const double idf = std::log(total / static_cast<double>(df.doc_count[i]));
        out.values[i] = (out.values[i] / doc_len) * idf;
    }
    return out;
}

FeatureVector we_transform(const Document& doc, const EmbeddingTable& table,
                           std::size_t max_words, std::size_t dims_per_word) {
    if (max_words == 0 || dims_per_word == 0) {
        throw ConfigError("word-embedding transform needs max_words and dims_per_word > 0");
    }
    if (table.dimension() != dims_per_word) {
        throw ConfigError("embedding table dimension " + std::to_string(table.dimension()) +
                          " does not match dims_per_word " + std::to_string(dims_per_word));
    }
    FeatureVector out;
    out.layout_tag = TransformKind::We;
    out.values.assign(max_words * dims_per_word, 0.0);
    const std::size_t n = std::min(doc.size(), max_words);
    for (std::size_t j = 0; j < n; ++j) {
        if (!table.contains(doc[j])) continue;  // OOV words leave zeros in their slot
        const std::vector<double> vec = table.lookup(doc[j]);
        std::copy(vec.begin(), vec.end(), out.values.begin() + static_cast<std::ptrdiff_t>(j * dims_per_word));
    }
    return out;
}

FeatureVector per_feature_transform(const std::array<Document, 6>& features, TransformKind base,
                                    const Vocabulary& vocab, const DocumentFrequencyTable& df) {
    if (base != TransformKind::Bow && base != TransformKind::Tfidf) {
        throw ConfigError("per-feature transform base must be bow or tfidf");
    }
    FeatureVector out;
    out.layout_tag = base == TransformKind::Bow ? TransformKind::BowPf : TransformKind::TfidfPf;
    out.values.reserve(6 * vocab.size());
    for (const Document& feature : features) {
        FeatureVector block = base == TransformKind::Bow ? bow_transform(feature, vocab)
                                                         : tfidf_transform(feature, vocab, df);
        out.values.insert(out.values.end(), block.values.begin(), block.values.end());
    }
    return out;
}

FeatureVector per_feature_transform(const FieldRecord& record, const Tokenizer& tokenizer,
                                    TransformKind base, const Vocabulary& vocab,
                                    const DocumentFrequencyTable& df) {
    return per_feature_transform(tokenize_record(record, tokenizer), base, vocab, df);
}

std::size_t FittedTransform::dimension() const {
    switch (config.kind) {
        case TransformKind::Bow:
        case TransformKind::Tfidf:
            return vocabulary.size();
        case TransformKind::BowPf:
        case TransformKind::TfidfPf:
            return 6 * vocabulary.size();
        case TransformKind::We:
            return config.max_words * config.dims_per_word;
    }
    return 0;
}

FeatureVector FittedTransform::apply(const FieldRecord& record) const {
    const Tokenizer tokenizer(tokenizer_config);
    switch (config.kind) {
        case TransformKind::Bow:
            return bow_transform(record_document(record, tokenizer), vocabulary);
        case TransformKind::Tfidf:
            return tfidf_transform(record_document(record, tokenizer), vocabulary, df);
        case TransformKind::We:
            return we_transform(record_document(record, tokenizer), embeddings, config.max_words,
                                config.dims_per_word);
        case TransformKind::BowPf:
            return per_feature_transform(record, tokenizer, TransformKind::Bow, vocabulary, df);
        case TransformKind::TfidfPf:
            return per_feature_transform(record, tokenizer, TransformKind::Tfidf, vocabulary, df);
    }
    throw ConfigError("unknown transform kind");
}

FittedTransform fit_transform(const std::vector<FieldRecord>& records, const FitOptions& options) {
    if (records.empty()) {
        throw TrainingError("cannot fit a transform on an empty record set");
    }
    FittedTransform fitted;
    fitted.config = options.transform;
    fitted.tokenizer_config = options.tokenizer;

    const Tokenizer tokenizer(options.tokenizer);
    std::vector<Document> docs;
    docs.reserve(records.size());
    for (const FieldRecord& record : records) {
        docs.push_back(record_document(record, tokenizer));
    }
    fitted.fitted_doc_count = docs.size();

    if (options.transform.kind == TransformKind::We) {
        if (options.pretrained_embeddings.has_value()) {
            fitted.embeddings = *options.pretrained_embeddings;
            if (fitted.embeddings.dimension() != options.transform.dims_per_word) {
                throw ConfigError("pretrained embedding dimension does not match dims_per_word");
            }
        } else {
            EmbeddingTrainConfig train_config = options.embedding_training;
            train_config.dimensions = options.transform.dims_per_word;
            fitted.embeddings = train_embeddings(docs, train_config);
        }
    } else {
        auto [vocab, df] = fit_vocabulary(docs);
        fitted.vocabulary = std::move(vocab);
        fitted.df = std::move(df);
    }
    return fitted;
}

}  // namespace cliredact
