#include "cliredact/tokenizer.hpp"

#include "cliredact/schema.hpp"

namespace cliredact {

namespace {

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_lower(c) || is_upper(c) || is_digit(c); }

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

}  // namespace

Tokenizer::Tokenizer(TokenizerConfig config) : config_(config) {}

std::vector<std::string> Tokenizer::tokenize(std::string_view raw) const {
    std::vector<std::string> tokens;
    const std::size_t limit = config_.max_tokens_per_feature;

    auto push = [&](std::string_view piece) {
        if (piece.empty()) return;
        if (limit != 0 && tokens.size() >= limit) return;
        tokens.push_back(config_.lowercase_output ? to_lower(piece) : std::string(piece));
    };

    std::size_t i = 0;
    const std::size_t n = raw.size();
    while (i < n) {
        if (!is_alnum(raw[i])) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < n && is_alnum(raw[end])) ++end;
        std::string_view frag = raw.substr(i, end - i);

        std::size_t start = 0;
        for (std::size_t k = 1; k < frag.size(); ++k) {
            const char prev = frag[k - 1];
            const char cur = frag[k];
            bool boundary = false;
            if (is_upper(cur) && (is_lower(prev) || is_digit(prev))) {
                boundary = true;
            } else if (is_upper(cur) && is_upper(prev) && k + 1 < frag.size() &&
                       is_lower(frag[k + 1])) {
                // Acronym run ends: the last uppercase letter opens the next word.
                boundary = true;
            }
            if (boundary) {
                push(frag.substr(start, k - start));
                start = k;
            }
        }
        push(frag.substr(start));
        i = end;
    }
    return tokens;
}

std::array<Document, 6> tokenize_record(const FieldRecord& record, const Tokenizer& tokenizer) {
    return {tokenizer.tokenize(record.command),     tokenizer.tokenize(record.module),
            tokenizer.tokenize(record.field_name),  tokenizer.tokenize(record.field_type),
            tokenizer.tokenize(record.parent_name), tokenizer.tokenize(record.parent_type)};
}

}  // namespace cliredact
