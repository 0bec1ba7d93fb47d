#include "cliredact/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "cliredact/errors.hpp"
#include "cliredact/rng.hpp"

namespace cliredact {

namespace {

std::string lower_copy(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

bool contains_stem(const std::string& text, const std::vector<std::string>& stems) {
    const std::string lowered = lower_copy(text);
    for (const std::string& stem : stems) {
        if (!stem.empty() && lowered.find(lower_copy(stem)) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

bool is_string_like_type(const std::string& type_name) {
    return lower_copy(type_name).find("string") != std::string::npos;
}

bool rule_label(const FieldRecord& record, const std::vector<std::string>& stems) {
    if (!is_string_like_type(record.field_type)) return false;
    return contains_stem(record.field_name, stems) || contains_stem(record.parent_name, stems);
}

// --- synthetic corpus generation ---

namespace {

const std::vector<std::string> kVerbs = {"Get",  "New",     "Set",  "Remove", "Update", "Start",
                                         "Stop", "Restart", "Test", "Add",    "Grant",  "Export"};

// Command nouns deliberately include stem-bearing names: a command like
// Get-AzKeyVault returns plenty of benign fields, which is exactly the
// confusion the per-feature transforms exist to resolve.
const std::vector<std::string> kCommandNouns = {
    "VM",         "Network",    "Storage",  "Location", "Resource",  "Disk",
    "Subnet",     "Policy",     "Cluster",  "Database", "Website",   "Function",
    "Gateway",    "Firewall",   "Balancer", "Monitor",  "Alert",     "Subscription",
    "Image",      "Snapshot",   "Vnet",     "Zone",     "Batch",     "Queue",
    "KeyVault",   "Token",      "Certificate", "Credential", "ConnectionString",
    "Secret",     "SasToken"};

const std::vector<std::string> kModules = {"Resources", "Compute", "Network", "Storage",
                                           "KeyVault",  "Sql",     "Websites", "Monitor",
                                           "Dns",       "Batch"};

const std::vector<std::string> kBenignNames = {
    "Location",     "DisplayName", "Id",        "Status",    "ProvisioningState",
    "Region",       "Sku",         "Tier",      "Size",      "CreatedTime",
    "Tags",         "ResourceGroup", "Endpoint", "Fqdn",      "Version",
    "Enabled",      "Capacity",    "Count",     "Kind",      "OsType",
    "Priority",     "Zone",        "Family",    "Offer",     "Publisher",
    "IpAddress",    "Subnet",      "Port",      "Protocol",  "Description",
    "Etag",         "Uri",         "Path",      "State",     "Health",
    "Quota",        "Limit",       "Interval",  "Schedule",  "Mode",
    "Level",        "Label",       "Owner",     "Scope",     "Duration"};

const std::vector<std::string> kContainerNames = {"Properties", "Settings",   "Profile",
                                                  "Identity",   "NetworkProfile", "OsDisk",
                                                  "Endpoints",  "Configuration"};

const std::vector<std::string> kStringTypes = {"string", "System.String", "SecureString",
                                               "System.Collections.Generic.List<string>",
                                               "string[]"};

const std::vector<std::string> kScalarTypes = {"int",  "bool",            "long",
                                               "double", "System.DateTime", "System.Guid",
                                               "byte"};

const std::vector<std::string> kSensitivePrefixes = {"",       "Admin",   "Primary", "Secondary",
                                                     "Account", "Service", "Storage", "App",
                                                     "Sql",     "User"};

const std::vector<std::string> kSensitiveSuffixes = {"", "Value", "Data", "Text", "Info", "Uri"};

const std::vector<std::string> kContainerStemSuffixes = {"s", "Settings", "Properties", "Info"};

const std::vector<std::string> kBenignStringValues = {
    "eastus",   "westeurope",    "Standard_D2s_v3", "Succeeded", "Enabled",
    "P1v2",     "northcentralus", "Standard_LRS",   "Running",   "Linux"};

// Benign field names the model should treat as negatives even though they
// carry a stem: their types are never string-like.
const std::vector<std::string> kHardNegativeSuffixes = {"Enabled", "Count", "Expiry", "Policy"};

std::string pascal_case(const std::string& word) {
    if (word.empty()) return word;
    std::string out = lower_copy(word);
    if (out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out;
}

std::vector<std::string> filter_stem_free(const std::vector<std::string>& pool,
                                          const std::vector<std::string>& stems) {
    std::vector<std::string> out;
    for (const std::string& name : pool) {
        if (!contains_stem(name, stems)) out.push_back(name);
    }
    return out;
}

struct CommandInfo {
    std::string name;
    std::string module;
    std::string root_type;
};

std::vector<CommandInfo> build_command_pool(const CorpusSpec& spec, Rng& rng) {
    std::vector<CommandInfo> pool;
    std::set<std::string> seen;
    std::size_t attempts = 0;
    while (pool.size() < spec.command_pool_size) {
        if (++attempts > spec.command_pool_size * 200 + 1000) {
            throw GenerationError("cannot synthesize " + std::to_string(spec.command_pool_size) +
                                  " distinct commands from the name pools");
        }
        const std::string& verb = kVerbs[rng.next_index(kVerbs.size())];
        std::string noun = kCommandNouns[rng.next_index(kCommandNouns.size())];
        if (rng.next_bool(0.4)) noun += kCommandNouns[rng.next_index(kCommandNouns.size())];
        const std::string name = verb + "-Az" + noun;
        if (!seen.insert(name).second) continue;
        CommandInfo info;
        info.name = name;
        info.module = kModules[rng.next_index(kModules.size())];
        static const std::vector<std::string> kRootSuffixes = {"", "Result", "Info", "Properties"};
        info.root_type = "PS" + noun + kRootSuffixes[rng.next_index(kRootSuffixes.size())];
        pool.push_back(std::move(info));
    }
    return pool;
}

nlohmann::json scalar_value_for(const std::string& type_name, Rng& rng) {
    if (type_name == "int" || type_name == "byte") return static_cast<int>(rng.next_index(512));
    if (type_name == "long") return static_cast<long long>(rng.next_u64() % 1000000000ULL);
    if (type_name == "bool") return rng.next_bool(0.5);
    if (type_name == "double") return static_cast<double>(rng.next_index(10000)) / 100.0;
    if (type_name == "System.DateTime") {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "2025-%02zu-%02zuT%02zu:%02zu:00Z",
                      1 + rng.next_index(12), 1 + rng.next_index(28), rng.next_index(24),
                      rng.next_index(60));
        return std::string(buf);
    }
    if (type_name == "System.Guid") {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%08llx-%04llx-%04llx-%04llx-%012llx",
                      static_cast<unsigned long long>(rng.next_u64() & 0xffffffffULL),
                      static_cast<unsigned long long>(rng.next_u64() & 0xffffULL),
                      static_cast<unsigned long long>(rng.next_u64() & 0xffffULL),
                      static_cast<unsigned long long>(rng.next_u64() & 0xffffULL),
                      static_cast<unsigned long long>(rng.next_u64() & 0xffffffffffffULL));
        return std::string(buf);
    }
    return kBenignStringValues[rng.next_index(kBenignStringValues.size())];
}

nlohmann::json secret_value(Rng& rng) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    const std::size_t len = 24 + rng.next_index(17);
    std::string out;
    out.reserve(len + 1);
    for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[rng.next_index(64)]);
    out.push_back('=');
    return out;
}

// Structure skeleton: decided before any naming so the sensitive quota can
// be sampled over the exact leaf population.
struct ResponsePlan {
    std::size_t command = 0;
    std::size_t plain_leaves = 0;
    bool has_container = false;
    std::size_t container_leaves = 0;
    bool single_leaf = false;  // response that is one bare leaf node

    std::size_t node_count() const {
        if (single_leaf) return 1;
        return 1 + plain_leaves + (has_container ? 1 + container_leaves : 0);
    }
    std::size_t leaf_count() const {
        if (single_leaf) return 1;
        return plain_leaves + container_leaves;
    }
};

}  // namespace

std::vector<GeneratedResponse> generate_responses(const CorpusSpec& spec) {
    std::vector<GeneratedResponse> responses;
    generate_corpus(spec, &responses);
    return responses;
}

std::vector<FieldRecord> generate_corpus(const CorpusSpec& spec) {
    return generate_corpus(spec, nullptr);
}

std::vector<FieldRecord> generate_corpus(const CorpusSpec& spec,
                                         std::vector<GeneratedResponse>* responses_out) {
    if (spec.record_count == 0) throw GenerationError("record_count must be positive");
    if (spec.positive_rate < 0.0 || spec.positive_rate > 1.0) {
        throw GenerationError("positive_rate must be in [0, 1]");
    }
    if (spec.label_noise_rate < 0.0 || spec.label_noise_rate > 1.0) {
        throw GenerationError("label_noise_rate must be in [0, 1]");
    }
    if (spec.sensitive_stems.empty()) throw GenerationError("sensitive_stems must be non-empty");
    if (spec.command_pool_size < 3) {
        throw GenerationError("command_pool_size must be at least 3 to allow splits");
    }

    const std::vector<std::string> benign_names =
        filter_stem_free(kBenignNames, spec.sensitive_stems);
    const std::vector<std::string> container_names =
        filter_stem_free(kContainerNames, spec.sensitive_stems);
    if (benign_names.empty() || container_names.empty()) {
        throw GenerationError("sensitive stems overlap every benign name in the pools");
    }

    Rng rng(spec.seed);
    const std::vector<CommandInfo> commands = build_command_pool(spec, rng);

    // Phase 1: structure skeleton, sized to the exact record budget.
    std::vector<ResponsePlan> plans;
    std::size_t budget = spec.record_count;
    std::size_t next_command = 0;
    while (budget > 0) {
        ResponsePlan plan;
        plan.command = next_command;
        next_command = (next_command + 1) % commands.size();
        if (budget == 1) {
            plan.single_leaf = true;
        } else {
            plan.plain_leaves = 3 + rng.next_index(8);
            if (rng.next_bool(0.45)) {
                plan.has_container = true;
                plan.container_leaves = 2 + rng.next_index(4);
            }
            while (plan.node_count() > budget) {
                if (plan.has_container && plan.container_leaves > 2) {
                    --plan.container_leaves;
                } else if (plan.has_container) {
                    plan.has_container = false;
                    plan.container_leaves = 0;
                } else if (plan.plain_leaves > 1) {
                    --plan.plain_leaves;
                } else {
                    break;  // root + one leaf = 2 nodes, budget must be >= 2 here
                }
            }
        }
        budget -= plan.node_count();
        plans.push_back(plan);
    }

    // Phase 2: sample the sensitive quota over all leaf slots.
    std::size_t total_leaves = 0;
    for (const ResponsePlan& plan : plans) total_leaves += plan.leaf_count();
    const std::size_t quota = static_cast<std::size_t>(
        std::llround(spec.positive_rate * static_cast<double>(spec.record_count)));
    if (quota > total_leaves) {
        throw GenerationError("positive_rate " + std::to_string(spec.positive_rate) +
                              " is unsatisfiable: only " + std::to_string(total_leaves) + " of " +
                              std::to_string(spec.record_count) + " records are leaf fields");
    }
    std::vector<std::uint8_t> sensitive(total_leaves, 0);
    {
        std::vector<std::size_t> slots(total_leaves);
        std::iota(slots.begin(), slots.end(), 0);
        rng.shuffle(slots);
        for (std::size_t i = 0; i < quota; ++i) sensitive[slots[i]] = 1;
    }

    // Phase 3: materialize nodes.
    std::vector<GeneratedResponse> responses;
    responses.reserve(plans.size());
    std::size_t slot = 0;

    auto make_sensitive_leaf = [&](bool parent_has_stem) {
        ResponseNode leaf;
        // Under a stem-named parent half the children rely on the parent
        // name alone (benign own name), the other half carry a stem as well.
        if (parent_has_stem && rng.next_bool(0.5)) {
            leaf.name = benign_names[rng.next_index(benign_names.size())];
        } else {
            const std::string stem =
                spec.sensitive_stems[rng.next_index(spec.sensitive_stems.size())];
            leaf.name = kSensitivePrefixes[rng.next_index(kSensitivePrefixes.size())] +
                        pascal_case(stem) +
                        kSensitiveSuffixes[rng.next_index(kSensitiveSuffixes.size())];
        }
        leaf.type_name = kStringTypes[rng.next_index(kStringTypes.size())];
        leaf.value = secret_value(rng);
        return leaf;
    };

    auto make_benign_leaf = [&](bool force_scalar) {
        ResponseNode leaf;
        if (!force_scalar && rng.next_bool(0.08)) {
            // Hard negative: stem-bearing name with a non-string type.
            const std::string stem =
                spec.sensitive_stems[rng.next_index(spec.sensitive_stems.size())];
            leaf.name = pascal_case(stem) +
                        kHardNegativeSuffixes[rng.next_index(kHardNegativeSuffixes.size())];
            leaf.type_name = kScalarTypes[rng.next_index(kScalarTypes.size())];
        } else {
            leaf.name = benign_names[rng.next_index(benign_names.size())];
            const bool string_type = !force_scalar && rng.next_bool(0.4);
            leaf.type_name = string_type ? kStringTypes[rng.next_index(kStringTypes.size())]
                                         : kScalarTypes[rng.next_index(kScalarTypes.size())];
        }
        leaf.value = scalar_value_for(leaf.type_name, rng);
        return leaf;
    };

    for (const ResponsePlan& plan : plans) {
        const CommandInfo& info = commands[plan.command];
        GeneratedResponse response;
        response.command = info.name;
        response.module = info.module;

        if (plan.single_leaf) {
            response.root =
                sensitive[slot++] ? make_sensitive_leaf(false) : make_benign_leaf(false);
            responses.push_back(std::move(response));
            continue;
        }

        ResponseNode root;
        root.type_name = info.root_type;  // anonymous root object
        for (std::size_t i = 0; i < plan.plain_leaves; ++i) {
            root.children.push_back(sensitive[slot++] ? make_sensitive_leaf(false)
                                                      : make_benign_leaf(false));
        }
        if (plan.has_container) {
            std::vector<std::uint8_t> child_sensitive(plan.container_leaves);
            bool any_sensitive = false;
            for (std::size_t i = 0; i < plan.container_leaves; ++i) {
                child_sensitive[i] = sensitive[slot++];
                any_sensitive |= child_sensitive[i] != 0;
            }
            ResponseNode container;
            const bool stem_named = any_sensitive && rng.next_bool(0.85);
            if (stem_named) {
                const std::string stem =
                    spec.sensitive_stems[rng.next_index(spec.sensitive_stems.size())];
                container.name =
                    pascal_case(stem) +
                    kContainerStemSuffixes[rng.next_index(kContainerStemSuffixes.size())];
            } else {
                container.name = container_names[rng.next_index(container_names.size())];
            }
            container.type_name = "PS" + container.name + "Set";
            for (std::size_t i = 0; i < plan.container_leaves; ++i) {
                if (child_sensitive[i]) {
                    container.children.push_back(make_sensitive_leaf(stem_named));
                } else {
                    // Under a stem-named parent any string-typed child would
                    // become sensitive by rule, so force scalars there.
                    container.children.push_back(make_benign_leaf(stem_named));
                }
            }
            root.children.push_back(std::move(container));
        }
        response.root = std::move(root);
        responses.push_back(std::move(response));
    }

    // Phase 4: flatten, apply the rule, verify it matches the sampled plan.
    std::vector<FieldRecord> records;
    records.reserve(spec.record_count);
    for (const GeneratedResponse& response : responses) {
        std::vector<FieldRecord> flat =
            flatten_response(response.command, response.module, response.root);
        for (FieldRecord& rec : flat) {
            rec.label = rule_label(rec, spec.sensitive_stems) ? 1 : 0;
            records.push_back(std::move(rec));
        }
    }
    if (records.size() != spec.record_count) {
        throw GenerationError("internal: generated record count mismatch");
    }
    std::size_t realized_quota = 0;
    for (const FieldRecord& rec : records) realized_quota += static_cast<std::size_t>(rec.label);
    if (realized_quota != quota) {
        throw GenerationError("internal: label rule disagrees with the sampled quota");
    }

    // Phase 5: label noise: drop a deterministic share of the positives.
    const std::size_t flips = static_cast<std::size_t>(
        std::llround(spec.label_noise_rate * static_cast<double>(quota)));
    if (flips > 0) {
        std::vector<std::size_t> positive_indices;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].label == 1) positive_indices.push_back(i);
        }
        rng.shuffle(positive_indices);
        for (std::size_t i = 0; i < flips; ++i) records[positive_indices[i]].label = 0;
    }

    // Realized positive rate must sit within +-20% of the requested rate.
    if (spec.positive_rate > 0.0) {
        const double realized = static_cast<double>(quota - flips) /
                                static_cast<double>(spec.record_count);
        if (realized < 0.8 * spec.positive_rate || realized > 1.2 * spec.positive_rate) {
            throw GenerationError("spec is unsatisfiable: realized positive rate " +
                                  std::to_string(realized) + " falls outside +-20% of " +
                                  std::to_string(spec.positive_rate) +
                                  " (record_count too small?)");
        }
    }

    if (responses_out != nullptr) *responses_out = std::move(responses);
    return records;
}

// --- splits ---

SplitPlan split_by_command(const std::vector<FieldRecord>& records,
                           const std::array<double, 3>& ratios, std::uint64_t seed) {
    double ratio_sum = 0.0;
    std::size_t active = 0;
    for (double r : ratios) {
        if (r < 0.0) throw SplitError("split ratios must be non-negative");
        ratio_sum += r;
        if (r > 0.0) ++active;
    }
    if (ratio_sum <= 0.0) throw SplitError("split ratios must sum to a positive value");

    // Distinct commands in first-appearance order, then a seeded shuffle.
    std::vector<std::string> commands;
    {
        std::set<std::string> seen;
        for (const FieldRecord& rec : records) {
            if (seen.insert(rec.command).second) commands.push_back(rec.command);
        }
    }
    if (commands.size() < active) {
        throw SplitError("need at least " + std::to_string(active) +
                         " distinct commands, got " + std::to_string(commands.size()));
    }
    Rng rng(seed);
    rng.shuffle(commands);

    // Largest-remainder apportionment, then make sure every active
    // partition holds at least one command.
    std::array<std::size_t, 3> counts{0, 0, 0};
    std::array<double, 3> fractional{0.0, 0.0, 0.0};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double exact = static_cast<double>(commands.size()) * ratios[i] / ratio_sum;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        fractional[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (fractional[a] != fractional[b]) return fractional[a] > fractional[b];
        return a < b;
    });
    for (std::size_t i = 0; assigned < commands.size(); ++i) {
        ++counts[order[i % 3]];
        ++assigned;
    }
    for (std::size_t i = 0; i < 3; ++i) {
        while (ratios[i] > 0.0 && counts[i] == 0) {
            std::size_t donor = 3;
            std::size_t donor_count = 1;
            for (std::size_t j = 0; j < 3; ++j) {
                if (counts[j] > donor_count) {
                    donor = j;
                    donor_count = counts[j];
                }
            }
            if (donor == 3) throw SplitError("not enough commands to fill every partition");
            --counts[donor];
            ++counts[i];
        }
    }

    SplitPlan plan;
    plan.ratios = ratios;
    plan.seed = seed;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < counts[0]; ++i) plan.train.insert(commands[cursor++]);
    for (std::size_t i = 0; i < counts[1]; ++i) plan.tune.insert(commands[cursor++]);
    for (std::size_t i = 0; i < counts[2]; ++i) plan.validate.insert(commands[cursor++]);
    return plan;
}

SplitIndices partition_records(const std::vector<FieldRecord>& records, const SplitPlan& plan) {
    SplitIndices out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string& cmd = records[i].command;
        if (plan.train.count(cmd)) {
            out.train.push_back(i);
        } else if (plan.tune.count(cmd)) {
            out.tune.push_back(i);
        } else if (plan.validate.count(cmd)) {
            out.validate.push_back(i);
        } else {
            throw SplitError("command '" + cmd + "' is missing from the split plan");
        }
    }
    return out;
}

// --- significance ---

double significance(const std::vector<double>& runs_a, const std::vector<double>& runs_b) {
    if (runs_a.size() < 2 || runs_b.size() < 2) {
        throw EvalError("significance needs at least 2 values per sample");
    }
    const double na = static_cast<double>(runs_a.size());
    const double nb = static_cast<double>(runs_b.size());
    const double mean_a = std::accumulate(runs_a.begin(), runs_a.end(), 0.0) / na;
    const double mean_b = std::accumulate(runs_b.begin(), runs_b.end(), 0.0) / nb;
    double var_a = 0.0, var_b = 0.0;
    for (double v : runs_a) var_a += (v - mean_a) * (v - mean_a);
    for (double v : runs_b) var_b += (v - mean_b) * (v - mean_b);
    var_a /= na - 1.0;
    var_b /= nb - 1.0;

    if (var_a == 0.0 && var_b == 0.0) {
        return mean_a == mean_b ? 1.0 : 0.0;
    }
    const double se2 = var_a / na + var_b / nb;
    const double t = (mean_a - mean_b) / std::sqrt(se2);
    const double df = se2 * se2 / ((var_a / na) * (var_a / na) / (na - 1.0) +
                                   (var_b / nb) * (var_b / nb) / (nb - 1.0));
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

// --- experiment grid ---

namespace {

EvalPoint evaluate_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                                double threshold, double beta) {
    std::size_t tp = 0, fp = 0, positives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool positive_label = labels[i] != 0;
        positives += positive_label ? 1 : 0;
        if (scores[i] >= threshold) {
            (positive_label ? tp : fp) += 1;
        }
    }
    EvalPoint pt;
    pt.threshold = threshold;
    const std::size_t predicted = tp + fp;
    pt.precision = predicted == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    pt.recall = positives == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(positives);
    pt.fbeta = fbeta_score(pt.precision, pt.recall, beta);
    return pt;
}

std::vector<FieldRecord> gather(const std::vector<FieldRecord>& records,
                                const std::vector<std::size_t>& indices) {
    std::vector<FieldRecord> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(records[i]);
    return out;
}

std::vector<int> gather_labels(const std::vector<FieldRecord>& records) {
    std::vector<int> out;
    out.reserve(records.size());
    for (const FieldRecord& rec : records) out.push_back(rec.label);
    return out;
}

bool has_both_classes(const std::vector<int>& labels) {
    bool pos = false, neg = false;
    for (int label : labels) (label != 0 ? pos : neg) = true;
    return pos && neg;
}

}  // namespace

ExperimentReport run_experiment(const std::vector<FieldRecord>& records,
                                const ExperimentConfig& config) {
    const auto experiment_start = std::chrono::steady_clock::now();
    if (records.empty()) throw TrainingError("experiment needs a non-empty corpus");
    if (!has_both_classes(gather_labels(records))) {
        throw TrainingError("experiment corpus needs both classes present");
    }
    if (config.repetitions == 0) throw ConfigError("repetitions must be positive");

    const SplitPlan base_plan = split_by_command(records, config.ratios, config.seed);

    ExperimentReport report;
    report.ratios = config.ratios;
    report.repetitions = config.repetitions;
    report.seed = config.seed;
    report.corpus_fingerprint = corpus_fingerprint(records);

    std::size_t cell_index = 0;
    for (TransformKind transform_kind : config.transforms) {
        for (ModelKind model_kind : config.models) {
            CellResult cell;
            cell.transform = transform_kind;
            cell.model = model_kind;
            try {
                for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
                    const auto run_start = std::chrono::steady_clock::now();
                    const std::uint64_t rep_seed =
                        Rng::derive(Rng::derive(config.seed, 0x5EED0000ULL + cell_index), rep);

                    SplitPlan plan = base_plan;
                    if (config.reshuffle_splits) {
                        plan = split_by_command(records, config.ratios,
                                                Rng::derive(config.seed, 0xA110C000ULL + rep));
                    }
                    const SplitIndices indices = partition_records(records, plan);
                    const std::vector<FieldRecord> train_records = gather(records, indices.train);
                    const std::vector<FieldRecord> tune_records = gather(records, indices.tune);
                    const std::vector<FieldRecord> validate_records =
                        gather(records, indices.validate);

                    FitOptions fit_options;
                    fit_options.transform = config.we_config;
                    fit_options.transform.kind = transform_kind;
                    fit_options.tokenizer = config.tokenizer;
                    fit_options.embedding_training = config.embedding_training;
                    fit_options.embedding_training.dimensions = config.we_config.dims_per_word;
                    fit_options.embedding_training.seed = rep_seed;
                    const FittedTransform fitted = fit_transform(train_records, fit_options);

                    const Matrix x_train = build_feature_matrix(train_records, fitted);
                    const std::vector<int> y_train = gather_labels(train_records);

                    ModelSpec spec = config.base_model_spec;
                    spec.kind = model_kind;
                    spec.seed = rep_seed;
                    TrainedModel model = train(x_train, y_train, spec);

                    const Matrix x_tune = build_feature_matrix(tune_records, fitted);
                    const std::vector<int> y_tune = gather_labels(tune_records);
                    const std::vector<double> tune_scores = predict_proba_all(model, x_tune);
                    const SweepResult tune_sweep = sweep(tune_scores, y_tune, config.metric);

                    const Matrix x_validate = build_feature_matrix(validate_records, fitted);
                    const std::vector<int> y_validate = gather_labels(validate_records);
                    const std::vector<double> validate_scores =
                        predict_proba_all(model, x_validate);
                    const EvalPoint validation = evaluate_at_threshold(
                        validate_scores, y_validate, tune_sweep.max_point.threshold,
                        config.metric.beta);

                    RunResult run;
                    run.repetition = rep;
                    run.seed = rep_seed;
                    run.max_f5_tune = tune_sweep.max_point.fbeta;
                    run.threshold = tune_sweep.max_point.threshold;
                    run.plateau_width_tune = tune_sweep.plateau_width;
                    run.f5_validation = validation.fbeta;
                    run.precision_validation = validation.precision;
                    run.recall_validation = validation.recall;
                    run.auc_validation = has_both_classes(y_validate)
                                             ? auc(validate_scores, y_validate)
                                             : std::nan("");
                    run.fitted_doc_count = fitted.fitted_doc_count;
                    run.train_split_size = train_records.size();
                    if (config.keep_curves) run.tune_curve = tune_sweep.curve;
                    run.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                         std::chrono::steady_clock::now() - run_start)
                                         .count();
                    cell.feature_dim = fitted.dimension();
                    cell.runs.push_back(run);
                }
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            if (!cell.runs.empty()) {
                double sum_tune = 0.0, sum_val = 0.0;
                for (const RunResult& run : cell.runs) {
                    sum_tune += run.max_f5_tune;
                    sum_val += run.f5_validation;
                }
                cell.mean_max_f5_tune = sum_tune / static_cast<double>(cell.runs.size());
                cell.mean_f5_validation = sum_val / static_cast<double>(cell.runs.size());
                if (cell.runs.size() > 1) {
                    double ss = 0.0;
                    for (const RunResult& run : cell.runs) {
                        const double d = run.f5_validation - cell.mean_f5_validation;
                        ss += d * d;
                    }
                    cell.std_f5_validation =
                        std::sqrt(ss / static_cast<double>(cell.runs.size() - 1));
                }
            }
            report.cells.push_back(std::move(cell));
            ++cell_index;
        }
    }

    // Feature-size table: one row per transform that produced features.
    for (TransformKind transform_kind : config.transforms) {
        for (const CellResult& cell : report.cells) {
            if (cell.transform == transform_kind && !cell.runs.empty()) {
                report.feature_sizes.push_back({transform_kind, cell.feature_dim});
                break;
            }
        }
    }

    // Pairwise Welch tests over validation F5 runs.
    for (std::size_t a = 0; a < report.cells.size(); ++a) {
        for (std::size_t b = a + 1; b < report.cells.size(); ++b) {
            if (report.cells[a].runs.size() < 2 || report.cells[b].runs.size() < 2) continue;
            std::vector<double> runs_a, runs_b;
            for (const RunResult& run : report.cells[a].runs) runs_a.push_back(run.f5_validation);
            for (const RunResult& run : report.cells[b].runs) runs_b.push_back(run.f5_validation);
            report.pairwise.push_back({a, b, significance(runs_a, runs_b)});
        }
    }

    report.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - experiment_start)
                            .count();
    return report;
}

void write_summary_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << "transform,model,repetition,seed,max_f5_tune,threshold,f5_validation,"
           "precision_validation,recall_validation,auc_validation,runtime_ms\n";
    char buf[512];
    for (const CellResult& cell : report.cells) {
        for (const RunResult& run : cell.runs) {
            std::snprintf(buf, sizeof(buf),
                          "%s,%s,%zu,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%lld\n",
                          transform_name(cell.transform), model_name(cell.model), run.repetition,
                          static_cast<unsigned long long>(run.seed), run.max_f5_tune,
                          run.threshold, run.f5_validation, run.precision_validation,
                          run.recall_validation, run.auc_validation,
                          static_cast<long long>(run.runtime_ms));
            out << buf;
        }
    }
}

void write_report_json(const ExperimentReport& report, const ExperimentConfig& config,
                       const std::optional<CorpusSpec>& corpus_spec, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = "cliredact-report";
    j["format_version"] = 1;
    j["seed"] = report.seed;
    j["repetitions"] = report.repetitions;
    j["ratios"] = report.ratios;
    j["reshuffle_splits"] = config.reshuffle_splits;
    j["corpus_fingerprint"] = report.corpus_fingerprint;
    j["runtime_ms"] = report.runtime_ms;
    j["conventions"] = {{"positive_prediction", "score >= threshold"},
                        {"precision_with_zero_predictions", 1.0},
                        {"tf_of_empty_document", 0.0},
                        {"idf_log_base", "e"}};
    j["metric"] = {{"beta", config.metric.beta}, {"recall_floor", config.metric.recall_floor}};
    j["hyperparameters"] = {
        {"lr",
         {{"learning_rate", config.base_model_spec.lr.learning_rate},
          {"epochs", config.base_model_spec.lr.epochs},
          {"l2", config.base_model_spec.lr.l2}}},
        {"bt",
         {{"rounds", config.base_model_spec.bt.rounds},
          {"max_depth", config.base_model_spec.bt.max_depth}}},
        {"nn",
         {{"hidden", config.base_model_spec.nn.hidden},
          {"learning_rate", config.base_model_spec.nn.learning_rate},
          {"epochs", config.base_model_spec.nn.epochs},
          {"batch_size", config.base_model_spec.nn.batch_size}}},
        {"we", {{"max_words", config.we_config.max_words},
                {"dims_per_word", config.we_config.dims_per_word}}},
        {"embedding_training",
         {{"window", config.embedding_training.window},
          {"negatives", config.embedding_training.negatives},
          {"epochs", config.embedding_training.epochs},
          {"learning_rate", config.embedding_training.learning_rate}}}};
    if (corpus_spec.has_value()) {
        j["corpus_spec"] = {{"record_count", corpus_spec->record_count},
                            {"positive_rate", corpus_spec->positive_rate},
                            {"sensitive_stems", corpus_spec->sensitive_stems},
                            {"label_noise_rate", corpus_spec->label_noise_rate},
                            {"command_pool_size", corpus_spec->command_pool_size},
                            {"seed", corpus_spec->seed}};
    }
    nlohmann::ordered_json sizes = nlohmann::ordered_json::array();
    for (const FeatureSizeEntry& entry : report.feature_sizes) {
        sizes.push_back({{"transform", transform_name(entry.transform)},
                         {"dimension", entry.dimension}});
    }
    j["feature_sizes"] = std::move(sizes);

    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const CellResult& cell : report.cells) {
        nlohmann::ordered_json runs = nlohmann::ordered_json::array();
        for (const RunResult& run : cell.runs) {
            runs.push_back({{"repetition", run.repetition},
                            {"seed", run.seed},
                            {"max_f5_tune", run.max_f5_tune},
                            {"threshold", run.threshold},
                            {"plateau_width_tune", run.plateau_width_tune},
                            {"f5_validation", run.f5_validation},
                            {"precision_validation", run.precision_validation},
                            {"recall_validation", run.recall_validation},
                            {"auc_validation", run.auc_validation},
                            {"runtime_ms", run.runtime_ms},
                            {"fitted_doc_count", run.fitted_doc_count},
                            {"train_split_size", run.train_split_size}});
        }
        cells.push_back({{"transform", transform_name(cell.transform)},
                         {"model", model_name(cell.model)},
                         {"feature_dim", cell.feature_dim},
                         {"mean_max_f5_tune", cell.mean_max_f5_tune},
                         {"mean_f5_validation", cell.mean_f5_validation},
                         {"std_f5_validation", cell.std_f5_validation},
                         {"error", cell.error},
                         {"runs", std::move(runs)}});
    }
    j["cells"] = std::move(cells);

    nlohmann::ordered_json pairwise = nlohmann::ordered_json::array();
    for (const PairwiseSignificance& pair : report.pairwise) {
        pairwise.push_back(
            {{"cell_a", pair.cell_a}, {"cell_b", pair.cell_b}, {"p_value", pair.p_value}});
    }
    j["pairwise_significance"] = std::move(pairwise);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace cliredact
