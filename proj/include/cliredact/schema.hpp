#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "cliredact/tokenizer.hpp"

namespace cliredact {

/// One node of a hierarchical command response. Children are held by value,
/// so a tree is finite and acyclic by construction. name and type_name may
/// be empty only at an anonymous root.
struct ResponseNode {
    std::string name;
    std::string type_name;
    /// Opaque scalar payload (string/number/bool) or null. Never used as a
    /// model feature; kept only so the redactor has something to mask.
    nlohmann::json value;
    std::vector<ResponseNode> children;
};

/// One response field with its six textual features and binary label.
/// This is the atomic ML example; label 1 means sensitive/redact.
struct FieldRecord {
    std::string command;
    std::string module;
    std::string field_name;
    std::string field_type;
    std::string parent_name;
    std::string parent_type;
    int label = 0;
};

inline constexpr std::size_t kDefaultMaxDepth = 64;

/// Emits one record per node in depth-first preorder. The root yields a
/// record with empty field_name when it is an anonymous object; children
/// carry their immediate parent's name and type. Labels start at 0.
std::vector<FieldRecord> flatten_response(const std::string& command, const std::string& module,
                                          const ResponseNode& root,
                                          std::size_t max_depth = kDefaultMaxDepth);

/// Counts nodes without flattening; flatten_response emits exactly this many
/// records.
std::size_t count_nodes(const ResponseNode& root);

/// Renders a record as one NLP-style document: tokens joined by spaces
/// within a feature, features joined by ';' in canonical order. Empty
/// features render as empty segments, so an all-empty record is ";;;;;".
std::string render_document(const FieldRecord& record, const Tokenizer& tokenizer);

/// Token sequence of the whole rendered document (the six per-feature token
/// lists concatenated in order).
Document record_document(const FieldRecord& record, const Tokenizer& tokenizer);

// --- file formats ---

/// Parses a response tree from its JSON form {name, type, value, children}.
ResponseNode response_from_json(const nlohmann::json& j,
                                std::size_t max_depth = kDefaultMaxDepth);
ResponseNode load_response(const std::string& path);
nlohmann::ordered_json response_to_json(const ResponseNode& node);
void save_response(const ResponseNode& node, const std::string& path);

/// Corpus files are JSONL: one record per line, UTF-8, LF line endings.
std::vector<FieldRecord> load_corpus(const std::string& path);
void save_corpus(const std::vector<FieldRecord>& records, const std::string& path);
nlohmann::ordered_json record_to_json(const FieldRecord& record);
FieldRecord record_from_json(const nlohmann::json& j);

}  // namespace cliredact
