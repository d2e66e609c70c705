#include "msentry/skops.hpp"

#include <algorithm>
#include <unordered_map>

#include "msentry/zip.hpp"

namespace msentry::skops {

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

std::string string_or_empty(const Json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return {};
    return it->get<std::string>();
}

bool loader_bearing(const Json& v) {
    if (!v.is_object()) return false;
    auto it = v.find("__loader__");
    return it != v.end() && it->is_string();
}

}  // namespace

const std::set<std::string>& known_loaders() {
    static const std::set<std::string> kKnown = {
        "ObjectNode",    "MethodNode",   "OperatorFuncNode", "FunctionNode", "TypeNode",
        "ListNode",      "SetNode",      "TupleNode",        "DictNode",     "BytesNode",
        "BytearrayNode", "NdArrayNode",  "SparseMatrixNode", "JsonNode",     "ConstantNode",
        "PartialNode",   "SliceNode",    "RangeNode",        "NoneNode",
    };
    return kKnown;
}

std::vector<Node> collect_nodes(const Json& schema) {
    std::vector<Node> nodes;

    struct Item {
        const Json* value;
        std::string pointer;
    };
    std::vector<Item> stack;
    stack.push_back({&schema, ""});

    while (!stack.empty()) {
        Item item = std::move(stack.back());
        stack.pop_back();
        const Json& v = *item.value;

        if (v.is_object()) {
            if (loader_bearing(v)) {
                Node node;
                node.locator = item.pointer;
                node.loader = string_or_empty(v, "__loader__");
                node.class_name = string_or_empty(v, "__class__");
                node.module = string_or_empty(v, "__module__");
                auto id = v.find("__id__");
                if (id != v.end() && id->is_number_integer())
                    node.node_id = id->get<std::int64_t>();
                auto content = v.find("content");
                if (content != v.end() && content->is_object()) {
                    auto fn = content->find("func");
                    if (fn != content->end() && fn->is_string())
                        node.func = fn->get<std::string>();
                    auto obj = content->find("obj");
                    if (obj != content->end() && loader_bearing(*obj))
                        node.obj_locator = item.pointer + "/content/obj";
                }
                nodes.push_back(std::move(node));
            }
            std::vector<Item> children;
            children.reserve(v.size());
            for (auto it = v.begin(); it != v.end(); ++it)
                children.push_back(
                    {&it.value(), item.pointer + "/" + escape_pointer_token(it.key())});
            for (auto rit = children.rbegin(); rit != children.rend(); ++rit)
                stack.push_back(std::move(*rit));
        } else if (v.is_array()) {
            for (std::size_t i = v.size(); i-- > 0;)
                stack.push_back({&v[i], item.pointer + "/" + std::to_string(i)});
        }
    }

    // MethodNode chain lengths via content/obj links, computed leaf-first.
    std::unordered_map<std::string, std::size_t> by_locator;
    for (std::size_t i = 0; i < nodes.size(); ++i) by_locator[nodes[i].locator] = i;
    for (std::size_t i = nodes.size(); i-- > 0;) {
        Node& n = nodes[i];
        if (n.loader != "MethodNode" || !n.obj_locator) continue;
        auto it = by_locator.find(*n.obj_locator);
        if (it == by_locator.end()) continue;
        const Node& child = nodes[it->second];
        if (child.loader == "MethodNode") n.chain_depth = child.chain_depth + 1;
    }
    return nodes;
}

ParsedSchema parse_skops_archive(ByteSpan bytes) {
    zip::Inventory inv;
    try {
        inv = zip::read_inventory(bytes);
    } catch (const ZipError& e) {
        throw ScanError(std::string("not a readable archive: ") + e.what());
    }

    const zip::Entry* schema = inv.find("schema.json");
    if (!schema) throw ScanError("schema.json absent from archive");

    Bytes doc = zip::read_entry(bytes, *schema);
    ParsedSchema out;
    try {
        out.schema = Json::parse(doc.begin(), doc.end());
    } catch (const Json::parse_error& e) {
        throw ScanError(std::string("schema.json unparseable: ") + e.what());
    }
    out.nodes = collect_nodes(out.schema);
    for (const auto& e : inv.entries)
        if (e.name != "schema.json") out.other_entries.push_back(e.name);
    return out;
}

std::vector<UntrustedType> enumerate_untrusted(const Json& schema,
                                               const std::set<std::string>& trusted) {
    std::vector<UntrustedType> out;
    std::set<std::string> seen;
    auto emit = [&](std::string type_string, const std::string& locator) {
        if (trusted.count(type_string)) return;
        if (!seen.insert(type_string).second) return;
        out.push_back({std::move(type_string), locator});
    };
    for (const Node& node : collect_nodes(schema)) {
        emit(node.type_string(), node.locator);
        if (node.loader == "MethodNode" && node.func)
            emit(node.type_string() + "." + *node.func, node.locator);
    }
    return out;
}

std::vector<Finding> rule_methodnode(const Json& schema, const Node& node, const Policy& policy) {
    std::vector<Finding> findings;
    if (node.loader != "MethodNode") return findings;

    if (!node.func) {
        findings.push_back(make_finding("SKOPS-MALFORMED-NODE",
                                        "MethodNode without a func field", node.locator, ""));
    } else if (policy.dunder_dangerous(*node.func)) {
        findings.push_back(make_finding(
            "SKOPS-ATTR-TRAVERSAL",
            "MethodNode reaches runtime internals via attribute \"" + *node.func + "\"",
            node.locator, *node.func));
    }

    if (node.obj_locator) {
        try {
            const Json& obj = schema.at(Json::json_pointer(*node.obj_locator));
            std::string obj_type =
                string_or_empty(obj, "__module__") + "." + string_or_empty(obj, "__class__");
            if (obj_type != node.type_string()) {
                findings.push_back(make_finding(
                    "SKOPS-TYPE-MISMATCH",
                    "MethodNode declares " + node.type_string() + " but its target declares " +
                        obj_type,
                    node.locator, string_or_empty(obj, "__class__")));
            }
        } catch (...) {
            // locator built by collect_nodes; lookup cannot realistically fail
        }
    }

    if (node.chain_depth >= policy.chain_depth_threshold) {
        findings.push_back(make_finding(
            "SKOPS-DEEP-CHAIN",
            "MethodNode chain of depth " + std::to_string(node.chain_depth) +
                " reaches the policy threshold",
            node.locator, ""));
    }
    return findings;
}

std::vector<Finding> rule_operatorfunc(const Node& node) {
    std::vector<Finding> findings;
    if (node.loader != "OperatorFuncNode") return findings;

    static const std::set<std::string> kDangerousOps = {"call", "attrgetter", "methodcaller",
                                                        "getitem"};
    bool spoofed = node.module != "operator";
    if (spoofed) {
        findings.push_back(make_finding(
            "SKOPS-OPERATOR-SPOOF",
            "validated type says " + node.type_string() + " but operator." + node.class_name +
                " is what gets invoked",
            node.locator, node.module));
    }
    if (kDangerousOps.count(node.class_name)) {
        findings.push_back(make_finding(
            "SKOPS-OPERATOR-DANGEROUS",
            "operator." + node.class_name + " can invoke arbitrary targets", node.locator,
            node.class_name));
    } else if (!spoofed) {
        findings.push_back(make_finding("SKOPS-OPERATOR-FUNC",
                                        "operator." + node.class_name + " referenced by schema",
                                        node.locator, node.class_name));
    }
    return findings;
}

std::vector<Finding> analyze_schema(const Json& schema, const Policy& policy) {
    std::vector<Finding> findings;
    std::vector<Node> nodes = collect_nodes(schema);

    for (const Node& node : nodes) {
        if (!known_loaders().count(node.loader)) {
            findings.push_back(make_finding(
                "SKOPS-UNKNOWN-LOADER",
                "loader \"" + node.loader + "\" is not recognized by this scanner", node.locator,
                node.loader));
        }
        auto mf = rule_methodnode(schema, node, policy);
        findings.insert(findings.end(), mf.begin(), mf.end());
        auto of = rule_operatorfunc(node);
        findings.insert(findings.end(), of.begin(), of.end());
    }

    for (const UntrustedType& t : enumerate_untrusted(schema, policy.skops_trusted)) {
        findings.push_back(make_finding("SKOPS-UNTRUSTED-TYPE",
                                        t.type_string + " requires review before loading",
                                        t.origin_locator, ""));
    }
    return findings;
}

std::optional<Finding> route_non_zip_skops(const FormatKind& format,
                                           std::string_view logical_name) {
    constexpr std::string_view kSuffix = ".skops";
    if (logical_name.size() < kSuffix.size() ||
        logical_name.substr(logical_name.size() - kSuffix.size()) != kSuffix)
        return std::nullopt;
    if (format.is_zip()) return std::nullopt;
    return make_finding(
        "SKOPS-JOBLIB-FALLBACK",
        ".skops file is not a ZIP archive; card loaders silently fall back to joblib (pickle)",
        "", "");
}

}  // namespace msentry::skops
