#include "cliredact/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cliredact/errors.hpp"
#include "cliredact/rng.hpp"

namespace cliredact {

std::vector<double> EmbeddingTable::lookup(const std::string& word) const {
    auto it = vectors_.find(word);
    if (it == vectors_.end()) return std::vector<double>(dimension_, 0.0);
    return it->second;
}

void EmbeddingTable::insert(const std::string& word, std::vector<double> vec) {
    if (vec.size() != dimension_) {
        throw ShapeError("embedding vector length " + std::to_string(vec.size()) +
                         " does not match table dimension " + std::to_string(dimension_));
    }
    for (double v : vec) {
        if (!std::isfinite(v)) throw ShapeError("embedding vector has a non-finite entry");
    }
    vectors_[word] = std::move(vec);
}

std::vector<std::string> EmbeddingTable::words() const {
    std::vector<std::string> out;
    out.reserve(vectors_.size());
    for (const auto& [word, _] : vectors_) out.push_back(word);
    std::sort(out.begin(), out.end());
    return out;
}

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ShapeError("vector length mismatch in distance");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ShapeError("vector length mismatch in cosine");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open embedding file: " + path);

    std::string line;
    if (!std::getline(in, line) || line.empty()) {
        throw ParseError(path + ":1: missing embedding header");
    }
    std::istringstream header(line);
    std::size_t word_count = 0, dimension = 0;
    if (!(header >> word_count >> dimension) || dimension == 0) {
        throw ParseError(path + ":1: header must be '<word_count> <dimension>'");
    }

    EmbeddingTable table(dimension);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string word;
        if (!(row >> word)) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": missing word");
        }
        std::vector<double> vec(dimension);
        for (std::size_t i = 0; i < dimension; ++i) {
            if (!(row >> vec[i])) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(dimension) + " values for '" + word + "'");
            }
        }
        double extra;
        if (row >> extra) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": too many values for '" +
                             word + "'");
        }
        if (table.contains(word)) {
            std::fprintf(stderr, "warning: %s:%zu: duplicate word '%s', keeping the last entry\n",
                         path.c_str(), line_no, word.c_str());
        }
        table.insert(word, std::move(vec));
    }
    if (table.size() != word_count) {
        std::fprintf(stderr, "warning: %s: header declares %zu words, file has %zu\n", path.c_str(),
                     word_count, table.size());
    }
    return table;
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << table.size() << " " << table.dimension() << "\n";
    char buf[64];
    for (const std::string& word : table.words()) {
        out << word;
        for (double v : table.lookup(word)) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << " " << buf;
        }
        out << "\n";
    }
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

EmbeddingTable train_embeddings(const std::vector<Document>& corpus,
                                const EmbeddingTrainConfig& config) {
    if (corpus.empty()) throw TrainingError("embedding training needs a non-empty corpus");
    if (config.dimensions < 2) throw TrainingError("embedding dimension must be at least 2");
    if (config.window == 0) throw TrainingError("embedding window must be positive");

    // Sorted vocab with corpus frequencies; indices are stable across runs.
    std::map<std::string, std::size_t> counts;
    for (const Document& doc : corpus) {
        for (const std::string& token : doc) ++counts[token];
    }
    if (counts.size() < 2) {
        throw TrainingError("embedding training needs at least 2 distinct tokens");
    }
    std::vector<std::string> vocab;
    std::vector<std::size_t> freq;
    vocab.reserve(counts.size());
    for (const auto& [word, count] : counts) {
        vocab.push_back(word);
        freq.push_back(count);
    }
    std::unordered_map<std::string, std::size_t> word_id;
    for (std::size_t i = 0; i < vocab.size(); ++i) word_id.emplace(vocab[i], i);

    // Negative-sampling table over the unigram distribution^0.75.
    constexpr std::size_t kTableSize = 1 << 17;
    std::vector<std::uint32_t> neg_table(kTableSize);
    {
        double total = 0.0;
        for (std::size_t f : freq) total += std::pow(static_cast<double>(f), 0.75);
        std::size_t idx = 0;
        double cum = std::pow(static_cast<double>(freq[0]), 0.75) / total;
        for (std::size_t i = 0; i < kTableSize; ++i) {
            neg_table[i] = static_cast<std::uint32_t>(idx);
            if (static_cast<double>(i + 1) / kTableSize > cum && idx + 1 < vocab.size()) {
                ++idx;
                cum += std::pow(static_cast<double>(freq[idx]), 0.75) / total;
            }
        }
    }

    const std::size_t dim = config.dimensions;
    const std::size_t vocab_size = vocab.size();
    std::vector<double> input(vocab_size * dim);
    std::vector<double> output(vocab_size * dim, 0.0);

    Rng rng(config.seed);
    const double init_span = 0.5 / static_cast<double>(dim);
    for (double& w : input) w = rng.next_range(-init_span, init_span);

    std::size_t corpus_tokens = 0;
    for (const Document& doc : corpus) corpus_tokens += doc.size();
    const double total_steps =
        static_cast<double>(std::max<std::size_t>(1, corpus_tokens * config.epochs));
    constexpr double kMinLearningRate = 1e-4;

    std::vector<double> grad(dim);
    std::size_t processed = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (const Document& doc : corpus) {
            for (std::size_t pos = 0; pos < doc.size(); ++pos) {
                ++processed;
                const double progress = static_cast<double>(processed) / total_steps;
                const double lr =
                    std::max(kMinLearningRate, config.learning_rate * (1.0 - progress));

                const std::size_t center = word_id.at(doc[pos]);
                // Shrunk window, as in the original skip-gram formulation.
                const std::size_t span = 1 + rng.next_index(config.window);
                const std::size_t lo = pos >= span ? pos - span : 0;
                const std::size_t hi = std::min(doc.size(), pos + span + 1);
                for (std::size_t ctx_pos = lo; ctx_pos < hi; ++ctx_pos) {
                    if (ctx_pos == pos) continue;
                    const std::size_t context = word_id.at(doc[ctx_pos]);
                    double* v_in = input.data() + center * dim;
                    std::fill(grad.begin(), grad.end(), 0.0);

                    for (std::size_t k = 0; k <= config.negatives; ++k) {
                        std::size_t target;
                        double label;
                        if (k == 0) {
                            target = context;
                            label = 1.0;
                        } else {
                            target = neg_table[rng.next_index(kTableSize)];
                            if (target == context) continue;
                            label = 0.0;
                        }
                        double* v_out = output.data() + target * dim;
                        double dot = 0.0;
                        for (std::size_t d = 0; d < dim; ++d) dot += v_in[d] * v_out[d];
                        const double g = (label - sigmoid(dot)) * lr;
                        for (std::size_t d = 0; d < dim; ++d) {
                            grad[d] += g * v_out[d];
                            v_out[d] += g * v_in[d];
                        }
                    }
                    for (std::size_t d = 0; d < dim; ++d) v_in[d] += grad[d];
                }
            }
        }
    }

    EmbeddingTable table(dim);
    for (std::size_t i = 0; i < vocab_size; ++i) {
        std::vector<double> vec(input.begin() + static_cast<std::ptrdiff_t>(i * dim),
                                input.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
        table.insert(vocab[i], std::move(vec));
    }
    return table;
}

}  // namespace cliredact
