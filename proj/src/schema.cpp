#include "cliredact/schema.hpp"

#include <fstream>
#include <sstream>

#include "cliredact/errors.hpp"

namespace cliredact {

namespace {

void flatten_node(const std::string& command, const std::string& module, const ResponseNode& node,
                  const ResponseNode* parent, std::size_t depth, std::size_t max_depth,
                  std::vector<FieldRecord>& out) {
    if (depth > max_depth) {
        throw DepthError("response nesting exceeds max depth " + std::to_string(max_depth));
    }
    FieldRecord rec;
    rec.command = command;
    rec.module = module;
    rec.field_name = node.name;
    rec.field_type = node.type_name;
    if (parent != nullptr) {
        rec.parent_name = parent->name;
        rec.parent_type = parent->type_name;
    }
    out.push_back(std::move(rec));
    for (const ResponseNode& child : node.children) {
        flatten_node(command, module, child, &node, depth + 1, max_depth, out);
    }
}

}  // namespace

std::vector<FieldRecord> flatten_response(const std::string& command, const std::string& module,
                                          const ResponseNode& root, std::size_t max_depth) {
    std::vector<FieldRecord> out;
    flatten_node(command, module, root, nullptr, 1, max_depth, out);
    return out;
}

std::size_t count_nodes(const ResponseNode& root) {
    std::size_t n = 1;
    for (const ResponseNode& child : root.children) n += count_nodes(child);
    return n;
}

std::string render_document(const FieldRecord& record, const Tokenizer& tokenizer) {
    const std::array<Document, 6> features = tokenize_record(record, tokenizer);
    std::string out;
    for (std::size_t f = 0; f < features.size(); ++f) {
        if (f != 0) out.push_back(';');
        for (std::size_t t = 0; t < features[f].size(); ++t) {
            if (t != 0) out.push_back(' ');
            out += features[f][t];
        }
    }
    return out;
}

Document record_document(const FieldRecord& record, const Tokenizer& tokenizer) {
    Document doc;
    for (Document& feature : tokenize_record(record, tokenizer)) {
        for (std::string& token : feature) doc.push_back(std::move(token));
    }
    return doc;
}

ResponseNode response_from_json(const nlohmann::json& j, std::size_t max_depth) {
    if (max_depth == 0) {
        throw DepthError("response nesting exceeds max depth");
    }
    if (!j.is_object()) {
        throw StructureError("response node must be a JSON object");
    }
    ResponseNode node;
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw ParseError("response node 'name' must be a string");
        node.name = j["name"].get<std::string>();
    }
    if (j.contains("type")) {
        if (!j["type"].is_string()) throw ParseError("response node 'type' must be a string");
        node.type_name = j["type"].get<std::string>();
    }
    if (j.contains("value")) {
        const nlohmann::json& v = j["value"];
        if (v.is_object() || v.is_array()) {
            throw ParseError("response node 'value' must be a scalar or null");
        }
        node.value = v;
    }
    if (j.contains("children")) {
        if (!j["children"].is_array()) throw ParseError("response node 'children' must be an array");
        for (const nlohmann::json& child : j["children"]) {
            node.children.push_back(response_from_json(child, max_depth - 1));
        }
    }
    return node;
}

ResponseNode load_response(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open response file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid response JSON in " + path + ": " + e.what());
    }
    return response_from_json(j);
}

nlohmann::ordered_json response_to_json(const ResponseNode& node) {
    nlohmann::ordered_json j;
    j["name"] = node.name;
    j["type"] = node.type_name;
    j["value"] = node.value;
    nlohmann::ordered_json children = nlohmann::ordered_json::array();
    for (const ResponseNode& child : node.children) children.push_back(response_to_json(child));
    j["children"] = std::move(children);
    return j;
}

void save_response(const ResponseNode& node, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << response_to_json(node).dump(2) << "\n";
}

nlohmann::ordered_json record_to_json(const FieldRecord& record) {
    nlohmann::ordered_json j;
    j["command"] = record.command;
    j["module"] = record.module;
    j["field_name"] = record.field_name;
    j["field_type"] = record.field_type;
    j["parent_name"] = record.parent_name;
    j["parent_type"] = record.parent_type;
    j["label"] = record.label;
    return j;
}

FieldRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("corpus record must be a JSON object");
    FieldRecord rec;
    auto read_string = [&](const char* key, std::string& dst, bool required) {
        if (!j.contains(key)) {
            if (required) throw ParseError(std::string("corpus record missing key '") + key + "'");
            return;
        }
        if (!j[key].is_string()) {
            throw ParseError(std::string("corpus record key '") + key + "' must be a string");
        }
        dst = j[key].get<std::string>();
    };
    read_string("command", rec.command, true);
    read_string("module", rec.module, false);
    read_string("field_name", rec.field_name, false);
    read_string("field_type", rec.field_type, false);
    read_string("parent_name", rec.parent_name, false);
    read_string("parent_type", rec.parent_type, false);
    if (j.contains("label")) {
        if (!j["label"].is_number_integer()) throw ParseError("corpus record 'label' must be 0 or 1");
        const int label = j["label"].get<int>();
        if (label != 0 && label != 1) throw ParseError("corpus record 'label' must be 0 or 1");
        rec.label = label;
    }
    if (rec.command.empty()) throw ParseError("corpus record 'command' must be non-empty");
    return rec;
}

std::vector<FieldRecord> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file: " + path);
    std::vector<FieldRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        try {
            records.push_back(record_from_json(j));
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void save_corpus(const std::vector<FieldRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    for (const FieldRecord& rec : records) {
        out << record_to_json(rec).dump() << "\n";
    }
}

}  // namespace cliredact
