#include "cliredact/redactor.hpp"

namespace cliredact {

namespace {

void redact_node(ResponseNode& node, const std::string& command, const std::string& module,
                 const ResponseNode* parent, const std::string& parent_path,
                 const TrainedModel& model, double threshold, RedactionResult& result) {
    FieldRecord record;
    record.command = command;
    record.module = module;
    record.field_name = node.name;
    record.field_type = node.type_name;
    if (parent != nullptr) {
        record.parent_name = parent->name;
        record.parent_type = parent->type_name;
    }

    const double score = predict_record(model, record);
    const bool redacted = score >= threshold;
    if (redacted && !node.value.is_null()) {
        node.value = kRedactedPlaceholder;
    }

    std::string path = parent == nullptr
                           ? (node.name.empty() ? "/" : "/" + node.name)
                           : (parent_path == "/" ? "/" + node.name : parent_path + "/" + node.name);
    result.audit.push_back({path, score, threshold, redacted ? "redact" : "allow"});

    // Children are scored on their own, even under a redacted parent.
    for (ResponseNode& child : node.children) {
        redact_node(child, command, module, &node, path, model, threshold, result);
    }
}

}  // namespace

RedactionResult redact(const ResponseNode& response, const std::string& command,
                       const std::string& module, const TrainedModel& model,
                       std::optional<double> threshold_override) {
    const double threshold = threshold_override.value_or(model.threshold);
    RedactionResult result;
    result.response = response;
    redact_node(result.response, command, module, nullptr, "", model, threshold, result);
    return result;
}

nlohmann::ordered_json redaction_result_to_json(const RedactionResult& result) {
    nlohmann::ordered_json j;
    j["response"] = response_to_json(result.response);
    nlohmann::ordered_json audit = nlohmann::ordered_json::array();
    for (const AuditEntry& entry : result.audit) {
        audit.push_back({{"path", entry.path},
                         {"score", entry.score},
                         {"threshold", entry.threshold},
                         {"action", entry.action}});
    }
    j["audit"] = std::move(audit);
    return j;
}

}  // namespace cliredact
