#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msentry/bytes.hpp"
#include "msentry/policy.hpp"

namespace msentry::keras {

using Json = nlohmann::ordered_json;

// One serialized object in a config tree: any JSON object carrying a
// "class_name" string. The locator is a JSON pointer from the document root.
struct ObjectNode {
    std::string locator;
    std::optional<std::string> module;
    std::optional<std::string> class_name;
    std::optional<std::string> registered_name;
    int depth = 1;  // nesting depth counted in object nodes, root = 1
};

struct LambdaSpec {
    enum class Kind { SerializedBytecode, FunctionReference };
    Kind kind = Kind::FunctionReference;
    std::optional<std::string> target_fqn;  // FunctionReference
    std::optional<Bytes> payload;           // SerializedBytecode
    std::string locator;
};

struct ParsedArchive {
    Json config;
    std::optional<std::string> declared_version;
    std::vector<std::string> weight_entries;  // listed, never decoded
    bool has_schema_marker = false;           // pathological: schema.json also present
};

inline constexpr int kMaxWalkDepth = 10000;

// Reads config.json (and metadata.json when present) out of a .keras archive.
// Throws ScanError when config.json is absent or unparseable.
ParsedArchive parse_keras_archive(ByteSpan bytes);

struct Walk {
    std::vector<ObjectNode> nodes;  // depth-first, document order
    bool truncated = false;         // depth cap hit
    std::string truncation_locator;
};

Walk walk_config(const Json& root);

// KV.1 rule: module outside the allowlist prefixes.
std::optional<Finding> rule_untrusted_module(const Json& doc, const ObjectNode& node,
                                             const Policy& policy);

// KV.2/KV.3 rules: Lambda layers, by reference or serialized bytecode.
std::vector<Finding> rule_lambda(const Json& doc, const ObjectNode& node, const Policy& policy);

std::optional<LambdaSpec> extract_lambda_spec(const Json& doc, const ObjectNode& node);

// Full analyzer for a parsed archive (walk + all rules).
std::vector<Finding> analyze_config(const Json& config, const Policy& policy);

struct LegacyScan {
    std::vector<Finding> findings;
    bool analyzed = false;  // false when no model_config document was located
};

// Legacy HDF5 path: byte-pattern location of the embedded model_config
// document, then the same config rules. Always emits the legacy-format note.
LegacyScan scan_legacy_h5(ByteSpan bytes, const Policy& policy);

}  // namespace msentry::keras
