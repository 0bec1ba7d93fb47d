#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cliredact/models.hpp"
#include "cliredact/schema.hpp"

namespace cliredact {

inline constexpr const char* kRedactedPlaceholder = "[REDACTED]";

struct AuditEntry {
    /// Slash-joined node names from the root; the anonymous root is "/".
    std::string path;
    double score = 0.0;
    double threshold = 0.0;
    /// "redact" or "allow".
    std::string action;
};

/// Outcome of redacting one response: the masked tree plus one audit entry
/// per field. Redacted fields have their value replaced by the placeholder;
/// names and types are never touched.
struct RedactionResult {
    ResponseNode response;
    std::vector<AuditEntry> audit;
};

/// Scores every field of the response with the model's bound transform and
/// masks the values of fields scoring at or above the threshold (the model's
/// stored threshold unless overridden). Children of a redacted parent are
/// still scored individually.
RedactionResult redact(const ResponseNode& response, const std::string& command,
                       const std::string& module, const TrainedModel& model,
                       std::optional<double> threshold_override = std::nullopt);

nlohmann::ordered_json redaction_result_to_json(const RedactionResult& result);

}  // namespace cliredact
