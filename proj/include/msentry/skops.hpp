#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "msentry/bytes.hpp"
#include "msentry/policy.hpp"
#include "msentry/sniffer.hpp"

namespace msentry::skops {

using Json = nlohmann::ordered_json;

// One loader-bearing schema node: any JSON object carrying a "__loader__"
// string. Locators are JSON pointers from the schema root.
struct Node {
    std::string locator;
    std::string loader;
    std::string class_name;  // "__class__"
    std::string module;      // "__module__"
    std::optional<std::string> func;
    std::optional<std::int64_t> node_id;      // "__id__"
    std::optional<std::string> obj_locator;   // content/obj child, when loader-bearing
    int chain_depth = 1;  // consecutive MethodNode nesting via obj links

    std::string type_string() const { return module + "." + class_name; }
};

struct ParsedSchema {
    Json schema;
    std::vector<Node> nodes;                // depth-first, document order
    std::vector<std::string> other_entries; // inventoried, never decoded
};

struct UntrustedType {
    std::string type_string;
    std::string origin_locator;

    bool operator==(const UntrustedType&) const = default;
};

// Reads schema.json from a .skops archive. Throws ScanError when the schema
// is absent or unparseable.
ParsedSchema parse_skops_archive(ByteSpan bytes);

// Node extraction from an already-parsed schema document (used directly by
// tests and by the legacy-free corpus checks).
std::vector<Node> collect_nodes(const Json& schema);

// Post-fix enumeration semantics: module.class for every loader-bearing node,
// plus module.class.func for MethodNodes. Document order, first-locator dedup.
std::vector<UntrustedType> enumerate_untrusted(const Json& schema,
                                               const std::set<std::string>& trusted);

std::vector<Finding> rule_methodnode(const Json& schema, const Node& node, const Policy& policy);
std::vector<Finding> rule_operatorfunc(const Node& node);

// Full analyzer: rules over every node plus untrusted-type review notes.
std::vector<Finding> analyze_schema(const Json& schema, const Policy& policy);

// SV.3 routing: a `.skops`-named file whose sniffed format is not a ZIP
// reaches pickle-based joblib in vulnerable loaders.
std::optional<Finding> route_non_zip_skops(const FormatKind& format,
                                           std::string_view logical_name);

const std::set<std::string>& known_loaders();

}  // namespace msentry::skops
