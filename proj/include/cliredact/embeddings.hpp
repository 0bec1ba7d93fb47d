#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cliredact/tokenizer.hpp"

namespace cliredact {

/// Word -> dense vector table. Every stored vector has length `dimension`.
/// Unknown words look up as the zero vector.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return vectors_.size(); }
    bool contains(const std::string& word) const { return vectors_.count(word) != 0; }

    /// Stored vector, or the zero vector for unknown words.
    std::vector<double> lookup(const std::string& word) const;

    /// Inserts or replaces; the vector length must equal dimension().
    void insert(const std::string& word, std::vector<double> vec);

    /// Words in lexicographic order (the serialization order).
    std::vector<std::string> words() const;

    const std::unordered_map<std::string, std::vector<double>>& raw() const { return vectors_; }

private:
    std::size_t dimension_ = 0;
    std::unordered_map<std::string, std::vector<double>> vectors_;
};

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b);
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Text embedding file: first line "<word_count> <dimension>", then one
/// "<word> <v1> ... <vl>" row per word. Duplicate words: last wins (a
/// warning goes to stderr).
EmbeddingTable load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingTable& table, const std::string& path);

struct EmbeddingTrainConfig {
    std::size_t dimensions = 20;
    std::size_t window = 3;
    std::size_t negatives = 5;
    std::size_t epochs = 15;
    double learning_rate = 0.025;
    std::uint64_t seed = 0;
};

/// Trains skip-gram word vectors with negative sampling over token
/// co-occurrence windows. Single-threaded and deterministic for a fixed
/// seed; every corpus token receives a vector.
EmbeddingTable train_embeddings(const std::vector<Document>& corpus,
                                const EmbeddingTrainConfig& config);

}  // namespace cliredact
