#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "msentry/bytes.hpp"
#include "msentry/errors.hpp"

namespace msentry {

enum class Severity { Info = 0, Suspicious = 1, Unsafe = 2 };

std::string_view severity_name(Severity s);

enum class Label { Clean, Suspicious, Unsafe, Unsupported, Error };

std::string_view label_name(Label l);

struct Finding {
    std::string rule_id;
    Severity severity = Severity::Info;
    std::string message;
    std::string locator;   // path into the artifact (JSON pointer, byte offset, entry name)
    std::string evidence;  // raw bytes from the artifact, capped at 256; escaped at render time
    std::string analyzer;
};

Finding make_finding(std::string_view rule_id, std::string message, std::string locator,
                     std::string evidence);

// One registered threat rule. References list the public CVE identifiers the
// rule was derived from, shown by the `rules` command.
struct RuleInfo {
    std::string_view id;
    Severity severity;
    std::string_view analyzer;
    std::string_view description;
    std::string_view references;
};

const std::vector<RuleInfo>& rule_catalog();
const RuleInfo* rule_info(std::string_view rule_id);

struct Policy {
    std::vector<std::string> keras_allowlist;
    std::vector<std::string> gadget_blocklist;
    std::vector<std::string> pickle_danger_list;
    std::optional<std::vector<std::string>> pickle_allowlist;
    std::set<std::string> skops_trusted;
    std::vector<std::string> dunder_danger;
    int chain_depth_threshold = 3;
    std::vector<std::string> bytecode_patterns;

    static Policy defaults();

    bool pickle_dangerous(std::string_view fqn) const;
    bool pickle_allowlisted(std::string_view fqn) const;  // false when no allowlist configured
    bool keras_module_allowed(std::string_view module) const;
    bool gadget_blocked(std::string_view fqn) const;
    bool dunder_dangerous(std::string_view attr) const;
};

// Strict policy loader: JSON document, unknown keys rejected by name, missing
// keys keep the shipped defaults. An empty document yields the defaults.
Policy load_policy(ByteSpan document);

// True iff `module` equals `prefix` or starts with `prefix` + "." (segment
// boundary match, so "keras" does not cover "kerasx").
bool module_prefix_match(std::string_view module, std::string_view prefix);

}  // namespace msentry
