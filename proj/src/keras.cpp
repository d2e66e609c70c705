#include "msentry/keras.hpp"

#include <algorithm>

#include "msentry/zip.hpp"

namespace msentry::keras {

namespace {

std::string escape_pointer_token(std::string_view key) {
    std::string out;
    out.reserve(key.size());
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out.push_back(c);
    }
    return out;
}

std::optional<std::string> string_field(const Json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
}

// Module part of a dotted path ("" when there is no dot).
std::string module_of(std::string_view fqn) {
    auto dot = fqn.rfind('.');
    return dot == std::string_view::npos ? std::string() : std::string(fqn.substr(0, dot));
}

}  // namespace

ParsedArchive parse_keras_archive(ByteSpan bytes) {
    zip::Inventory inv;
    try {
        inv = zip::read_inventory(bytes);
    } catch (const ZipError& e) {
        throw ScanError(std::string("not a readable archive: ") + e.what());
    }

    const zip::Entry* config = inv.find("config.json");
    if (!config) throw ScanError("config.json absent from archive");

    Bytes doc = zip::read_entry(bytes, *config);
    ParsedArchive out;
    try {
        out.config = Json::parse(doc.begin(), doc.end());
    } catch (const Json::parse_error& e) {
        throw ScanError(std::string("config.json unparseable: ") + e.what());
    }
    if (!out.config.is_object()) throw ScanError("config.json root is not an object");

    if (const zip::Entry* meta = inv.find("metadata.json")) {
        try {
            Bytes raw = zip::read_entry(bytes, *meta);
            Json m = Json::parse(raw.begin(), raw.end());
            if (m.is_object()) out.declared_version = string_field(m, "keras_version");
        } catch (...) {
            // metadata is advisory; a broken one does not block analysis
        }
    }

    for (const auto& e : inv.entries)
        if (e.name != "config.json" && e.name != "metadata.json" && e.name != "schema.json")
            out.weight_entries.push_back(e.name);
    out.has_schema_marker = inv.has("schema.json");
    return out;
}

Walk walk_config(const Json& root) {
    Walk walk;

    struct Item {
        const Json* value;
        std::string pointer;
        int obj_depth;  // object-node depth of the nearest enclosing node
    };
    std::vector<Item> stack;
    stack.push_back({&root, "", 0});

    while (!stack.empty()) {
        Item item = std::move(stack.back());
        stack.pop_back();
        const Json& v = *item.value;
        int depth = item.obj_depth;

        if (v.is_object()) {
            auto cn = v.find("class_name");
            if (cn != v.end() && cn->is_string()) {
                depth += 1;
                if (depth > kMaxWalkDepth) {
                    walk.truncated = true;
                    if (walk.truncation_locator.empty()) walk.truncation_locator = item.pointer;
                    continue;  // do not descend past the cap
                }
                ObjectNode node;
                node.locator = item.pointer;
                node.module = string_field(v, "module");
                node.class_name = cn->get<std::string>();
                node.registered_name = string_field(v, "registered_name");
                node.depth = depth;
                walk.nodes.push_back(std::move(node));
            }
            // children pushed in reverse so the walk yields document order
            std::vector<Item> children;
            children.reserve(v.size());
            for (auto it = v.begin(); it != v.end(); ++it)
                children.push_back(
                    {&it.value(), item.pointer + "/" + escape_pointer_token(it.key()), depth});
            for (auto rit = children.rbegin(); rit != children.rend(); ++rit)
                stack.push_back(std::move(*rit));
        } else if (v.is_array()) {
            std::size_t n = v.size();
            for (std::size_t i = n; i-- > 0;)
                stack.push_back({&v[i], item.pointer + "/" + std::to_string(i), depth});
        }
    }
    return walk;
}

std::optional<Finding> rule_untrusted_module(const Json&, const ObjectNode& node,
                                             const Policy& policy) {
    if (!node.module) return std::nullopt;
    if (policy.keras_module_allowed(*node.module)) return std::nullopt;
    std::string fqn = *node.module + "." + node.class_name.value_or("?");
    return make_finding("KERAS-UNTRUSTED-MODULE",
                        fqn + " would be imported and instantiated as a layer at load time",
                        node.locator, *node.module);
}

std::optional<LambdaSpec> extract_lambda_spec(const Json& doc, const ObjectNode& node) {
    const Json* v = nullptr;
    try {
        v = &doc.at(Json::json_pointer(node.locator));
    } catch (...) {
        return std::nullopt;
    }
    auto cfg = v->find("config");
    if (cfg == v->end() || !cfg->is_object()) return std::nullopt;
    auto fn = cfg->find("function");
    if (fn == cfg->end()) return std::nullopt;

    LambdaSpec spec;
    spec.locator = node.locator;

    if (fn->is_string()) {
        spec.kind = LambdaSpec::Kind::FunctionReference;
        spec.target_fqn = fn->get<std::string>();
        return spec;
    }
    if (!fn->is_object()) return std::nullopt;

    auto fn_cfg = fn->find("config");
    if (fn_cfg == fn->end()) return std::nullopt;

    if (fn_cfg->is_string()) {
        spec.kind = LambdaSpec::Kind::FunctionReference;
        auto mod = string_field(*fn, "module");
        spec.target_fqn =
            mod ? *mod + "." + fn_cfg->get<std::string>() : fn_cfg->get<std::string>();
        return spec;
    }
    if (fn_cfg->is_object() && fn_cfg->contains("code") && (*fn_cfg)["code"].is_string()) {
        spec.kind = LambdaSpec::Kind::SerializedBytecode;
        auto decoded = base64_decode((*fn_cfg)["code"].get<std::string>());
        if (decoded) spec.payload = std::move(*decoded);
        return spec;  // payload stays empty when the encoding is broken
    }
    return std::nullopt;
}

std::vector<Finding> rule_lambda(const Json& doc, const ObjectNode& node, const Policy& policy) {
    std::vector<Finding> findings;
    auto spec = extract_lambda_spec(doc, node);
    if (!spec) {
        findings.push_back(make_finding("KERAS-LAMBDA-MALFORMED",
                                        "Lambda layer without a recognizable function descriptor",
                                        node.locator, ""));
        return findings;
    }

    if (spec->kind == LambdaSpec::Kind::FunctionReference) {
        const std::string& fqn = *spec->target_fqn;
        std::string mod = module_of(fqn);
        if (policy.gadget_blocked(fqn)) {
            findings.push_back(make_finding(
                "KERAS-GADGET-REUSE",
                "Lambda invokes blocklisted internal utility " + fqn + " at load time",
                node.locator, fqn.substr(mod.empty() ? 0 : mod.size() + 1)));
        } else if (!policy.keras_module_allowed(mod)) {
            findings.push_back(make_finding(
                "KERAS-UNTRUSTED-MODULE",
                "Lambda references " + fqn + " outside the trusted module prefixes",
                node.locator, mod.empty() ? fqn : mod));
        } else {
            findings.push_back(make_finding("KERAS-LAMBDA-REF",
                                            "Lambda references " + fqn + " by name", node.locator,
                                            fqn.substr(mod.empty() ? 0 : mod.size() + 1)));
        }
        return findings;
    }

    // SerializedBytecode
    if (!spec->payload) {
        findings.push_back(make_finding("KERAS-LAMBDA-MALFORMED",
                                        "Lambda bytecode payload could not be decoded",
                                        node.locator, ""));
        return findings;
    }
    const Bytes& payload = *spec->payload;
    for (const auto& pattern : policy.bytecode_patterns) {
        if (contains_bytes(payload, as_bytes(pattern))) {
            findings.push_back(make_finding(
                "KERAS-LAMBDA-BYTECODE-DANGEROUS",
                "Lambda bytecode embeds dangerous identifier \"" + pattern + "\"", node.locator,
                pattern));
            return findings;
        }
    }
    findings.push_back(make_finding(
        "KERAS-LAMBDA-BYTECODE",
        "Lambda carries serialized bytecode; content cannot be verified statically",
        node.locator,
        to_string(ByteSpan(payload).subspan(0, std::min<std::size_t>(payload.size(), 32)))));
    return findings;
}

std::vector<Finding> analyze_config(const Json& config, const Policy& policy) {
    std::vector<Finding> findings;
    Walk walk = walk_config(config);

    if (walk.truncated)
        findings.push_back(make_finding(
            "KERAS-DEPTH-BOMB",
            "config nesting exceeds depth cap " + std::to_string(kMaxWalkDepth) +
                "; walk truncated",
            walk.truncation_locator, ""));

    for (const ObjectNode& node : walk.nodes) {
        if (auto f = rule_untrusted_module(config, node, policy)) findings.push_back(*f);
        if (node.class_name == "Lambda") {
            auto lf = rule_lambda(config, node, policy);
            findings.insert(findings.end(), lf.begin(), lf.end());
        }
        // registered_name equal to the class name is how the framework tags
        // its own serializable types; only genuinely custom names matter
        if (node.registered_name && *node.registered_name != "function" &&
            node.class_name != "function" && node.registered_name != node.class_name) {
            findings.push_back(make_finding(
                "KERAS-REGISTERED-NAME",
                "custom registered object \"" + *node.registered_name +
                    "\" requires its package at load time",
                node.locator, *node.registered_name));
        }
    }
    return findings;
}

namespace {

// String-aware balanced extraction of one JSON object starting at `start`.
std::optional<ByteSpan> balanced_json(ByteSpan data, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < data.size(); ++i) {
        std::uint8_t c = data[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            --depth;
            if (depth == 0) return data.subspan(start, i - start + 1);
            if (depth < 0) return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

LegacyScan scan_legacy_h5(ByteSpan bytes, const Policy& policy) {
    LegacyScan out;
    out.findings.push_back(make_finding(
        "KERAS-LEGACY-FORMAT",
        "legacy HDF5 model; safe_mode historically not enforced for this format", "",
        "model_config"));

    static constexpr std::string_view kMarker = "model_config";
    std::size_t search_from = 0;
    bool marker_seen = false;
    int attempts = 0;

    while (attempts < 8) {
        auto hit = find_bytes(bytes, as_bytes(kMarker), search_from);
        if (!hit) break;
        marker_seen = true;
        ++attempts;
        search_from = *hit + kMarker.size();

        // The serialized document sits shortly after the attribute name.
        std::size_t window_end = std::min(bytes.size(), search_from + 4096);
        for (std::size_t i = search_from; i < window_end; ++i) {
            if (bytes[i] != '{') continue;
            auto doc = balanced_json(bytes, i);
            if (!doc) break;
            try {
                Json parsed = Json::parse(doc->begin(), doc->end());
                if (!parsed.is_object()) continue;
                auto rules = analyze_config(parsed, policy);
                out.findings.insert(out.findings.end(), rules.begin(), rules.end());
                out.analyzed = true;
                return out;
            } catch (const Json::parse_error&) {
                continue;  // try the next opening brace / next marker
            }
        }
    }

    if (marker_seen) {
        out.findings.push_back(make_finding(
            "KERAS-LEGACY-UNPARSEABLE",
            "model_config marker present but no parseable embedded document", "", "model_config"));
        out.analyzed = true;
    }
    return out;
}

}  // namespace msentry::keras
