#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cliredact/errors.hpp"
#include "cliredact/schema.hpp"
#include "cliredact/tokenizer.hpp"

using namespace cliredact;

namespace {

/// The Get-AzLocation response used throughout the tests.
ResponseNode location_response() {
    ResponseNode root;
    root.type_name = "PSResourceProviderLocation";
    ResponseNode location{"Location", "string", "eastasia", {}};
    ResponseNode display{"DisplayName", "string", "East Asia", {}};
    ResponseNode providers{"Providers", "System.Collections.Generic.List<string>",
                           "{Microsoft.Devices, Microsoft.Cache}", {}};
    root.children = {location, display, providers};
    return root;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("flatten produces the four location records") {
    const auto records = flatten_response("Get-AzLocation", "Resources", location_response());
    REQUIRE(records.size() == 4);

    CHECK(records[0].command == "Get-AzLocation");
    CHECK(records[0].module == "Resources");
    CHECK(records[0].field_name == "");
    CHECK(records[0].field_type == "PSResourceProviderLocation");
    CHECK(records[0].parent_name == "");
    CHECK(records[0].parent_type == "");

    CHECK(records[1].field_name == "Location");
    CHECK(records[1].field_type == "string");
    CHECK(records[1].parent_name == "");
    CHECK(records[1].parent_type == "PSResourceProviderLocation");

    CHECK(records[2].field_name == "DisplayName");
    CHECK(records[3].field_name == "Providers");
    CHECK(records[3].field_type == "System.Collections.Generic.List<string>");
    CHECK(records[3].parent_type == "PSResourceProviderLocation");

    for (const FieldRecord& rec : records) CHECK(rec.label == 0);
}

TEST_CASE("flatten of a single leaf") {
    ResponseNode leaf{"Status", "string", "ok", {}};
    const auto records = flatten_response("cmd", "mod", leaf);
    REQUIRE(records.size() == 1);
    CHECK(records[0].field_name == "Status");
    CHECK(records[0].parent_name == "");
    CHECK(records[0].parent_type == "");
}

TEST_CASE("flatten walks preorder and matches a hand-walked 5-node tree") {
    // root -> {A -> {A1, A2}, B}
    ResponseNode a1{"A1", "string", nullptr, {}};
    ResponseNode a2{"A2", "int", nullptr, {}};
    ResponseNode a{"A", "PSGroup", nullptr, {a1, a2}};
    ResponseNode b{"B", "bool", nullptr, {}};
    ResponseNode root{"", "PSRoot", nullptr, {a, b}};

    const auto records = flatten_response("cmd", "mod", root);
    REQUIRE(records.size() == 5);
    REQUIRE(records.size() == count_nodes(root));

    CHECK(records[0].field_name == "");
    CHECK(records[1].field_name == "A");
    CHECK(records[1].parent_type == "PSRoot");
    CHECK(records[2].field_name == "A1");
    CHECK(records[2].parent_name == "A");
    CHECK(records[2].parent_type == "PSGroup");
    CHECK(records[3].field_name == "A2");
    CHECK(records[3].parent_name == "A");
    CHECK(records[4].field_name == "B");
    CHECK(records[4].parent_name == "");
    CHECK(records[4].parent_type == "PSRoot");
}

TEST_CASE("flatten rejects trees deeper than the limit") {
    ResponseNode deep{"Leaf", "string", nullptr, {}};
    for (int i = 0; i < 70; ++i) {
        ResponseNode wrapper{"Level", "PSLevel", nullptr, {deep}};
        deep = wrapper;
    }
    CHECK_THROWS_AS(flatten_response("cmd", "mod", deep), DepthError);
    CHECK_NOTHROW(flatten_response("cmd", "mod", deep, 128));
}

TEST_CASE("render_document reproduces the location table rows") {
    const Tokenizer keep_case{TokenizerConfig{false, 0}};
    const auto records = flatten_response("Get-AzLocation", "Resources", location_response());
    REQUIRE(records.size() == 4);
    CHECK(render_document(records[0], keep_case) ==
          "Get Az Location;Resources;;PS Resource Provider Location;;");
    CHECK(render_document(records[1], keep_case) ==
          "Get Az Location;Resources;Location;string;;PS Resource Provider Location");
    CHECK(render_document(records[2], keep_case) ==
          "Get Az Location;Resources;Display Name;string;;PS Resource Provider Location");
    CHECK(render_document(records[3], keep_case) ==
          "Get Az Location;Resources;Providers;System Collections Generic List string;;"
          "PS Resource Provider Location");
}

TEST_CASE("render_document of an all-empty record") {
    FieldRecord empty;
    CHECK(render_document(empty, Tokenizer()) == ";;;;;");
}

TEST_CASE("rendered documents always carry exactly five feature separators") {
    const auto records = flatten_response("Get-AzLocation", "Resources", location_response());
    for (const FieldRecord& rec : records) {
        const std::string doc = render_document(rec, Tokenizer());
        CHECK(std::count(doc.begin(), doc.end(), ';') == 5);
    }
}

TEST_CASE("splitting a rendered document recovers the per-feature tokens") {
    const Tokenizer tokenizer;
    const auto records = flatten_response("Get-AzLocation", "Resources", location_response());
    for (const FieldRecord& rec : records) {
        const std::string doc = render_document(rec, tokenizer);
        std::vector<std::string> segments;
        std::string current;
        for (char c : doc) {
            if (c == ';') {
                segments.push_back(current);
                current.clear();
            } else {
                current.push_back(c);
            }
        }
        segments.push_back(current);
        REQUIRE(segments.size() == 6);
        const auto features = tokenize_record(rec, tokenizer);
        for (std::size_t f = 0; f < 6; ++f) {
            CHECK(tokenizer.tokenize(segments[f]) == features[f]);
        }
    }
}

TEST_CASE("record_document equals tokenize of the rendered string") {
    const Tokenizer tokenizer;
    const auto records = flatten_response("Get-AzLocation", "Resources", location_response());
    for (const FieldRecord& rec : records) {
        CHECK(record_document(rec, tokenizer) ==
              tokenizer.tokenize(render_document(rec, tokenizer)));
    }
}

TEST_CASE("response json round-trip") {
    const ResponseNode original = location_response();
    const ResponseNode parsed = response_from_json(response_to_json(original));
    CHECK(flatten_response("c", "m", parsed).size() == 4);
    CHECK(parsed.children[0].name == "Location");
    CHECK(parsed.children[0].value.get<std::string>() == "eastasia");
}

TEST_CASE("response json validation") {
    CHECK_THROWS_AS(response_from_json(nlohmann::json::array()), StructureError);
    CHECK_THROWS_AS(response_from_json(nlohmann::json{{"name", 3}}), ParseError);
    CHECK_THROWS_AS(
        response_from_json(nlohmann::json{{"name", "x"}, {"value", nlohmann::json::object()}}),
        ParseError);
}

TEST_CASE("corpus jsonl round-trip and parse errors") {
    std::vector<FieldRecord> records(3);
    records[0] = {"Get-AzVM", "Compute", "AdminPassword", "SecureString", "", "PSVm", 1};
    records[1] = {"Get-AzVM", "Compute", "Location", "string", "", "PSVm", 0};
    records[2] = {"New-AzDisk", "Compute", "", "PSDisk", "", "", 0};

    const std::string path = temp_path("cliredact_corpus_test.jsonl");
    save_corpus(records, path);
    const auto loaded = load_corpus(path);
    REQUIRE(loaded.size() == 3);
    CHECK(loaded[0].field_name == "AdminPassword");
    CHECK(loaded[0].label == 1);
    CHECK(loaded[2].command == "New-AzDisk");

    std::ofstream bad(path, std::ios::binary);
    bad << "{\"command\": \"x\"}\nnot json\n";
    bad.close();
    CHECK_THROWS_AS(load_corpus(path), ParseError);
    std::filesystem::remove(path);
}
