#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cliredact {

struct FieldRecord;

/// Ordered list of normalized word tokens. Tokens are non-empty and
/// contain only ASCII alphanumerics.
using Document = std::vector<std::string>;

struct TokenizerConfig {
    bool lowercase_output = true;
    /// 0 means unlimited; applied per feature.
    std::size_t max_tokens_per_feature = 0;
};

/// Splits identifier strings into word tokens.
///
/// Rules, applied in order:
///   1. the input is cut into fragments at every non-alphanumeric byte;
///   2. within a fragment, a new token starts at each lowercase-to-uppercase
///      boundary (digits count as lowercase here, so "Sha256Config" yields
///      sha256 / config);
///   3. an uppercase run followed by a lowercase letter ends one letter
///      early, so "AzVMConfig" yields az / vm / config;
///   4. a trailing uppercase run stays whole ("ConfigVM" -> config / vm).
class Tokenizer {
public:
    Tokenizer() = default;
    explicit Tokenizer(TokenizerConfig config);

    std::vector<std::string> tokenize(std::string_view raw) const;

    const TokenizerConfig& config() const { return config_; }

private:
    TokenizerConfig config_;
};

/// Feature names in the canonical order used throughout the project.
inline constexpr std::array<const char*, 6> kFeatureNames = {
    "Command", "Module", "Field Name", "Field Type", "Parent Name", "Parent Type"};

/// Tokenizes the six features of a record in canonical order.
std::array<Document, 6> tokenize_record(const FieldRecord& record, const Tokenizer& tokenizer);

}  // namespace cliredact
