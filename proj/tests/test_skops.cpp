#include "doctest.h"
#include "msentry/corpus.hpp"
#include "msentry/skops.hpp"

using namespace msentry;
using skops::Json;

namespace {

const Policy kPolicy = Policy::defaults();

// The MethodNode-chain schema: a trusted-looking object, then attribute
// traversal to __builtins__.
const char* kChainSchema = R"({
  "__class__": "int",
  "__module__": "builtins",
  "__loader__": "MethodNode",
  "content": {
    "obj": {
      "__class__": "int",
      "__module__": "builtins",
      "__loader__": "MethodNode",
      "content": {
        "obj": {
          "__class__": "QuadraticDiscriminantAnalysis",
          "__module__": "sklearn.discriminant_analysis",
          "__loader__": "ObjectNode",
          "__id__": 1
        },
        "func": "decision_function"
      }
    },
    "func": "__builtins__"
  }
})";

const char* kOperatorSchema = R"({
  "__class__": "call",
  "__module__": "sklearn.SGDRegressor",
  "__loader__": "OperatorFuncNode"
})";

bool has_rule(const std::vector<Finding>& fs, std::string_view rule) {
    for (const auto& f : fs)
        if (f.rule_id == rule) return true;
    return false;
}

}  // namespace

TEST_CASE("chain schema parses to nested MethodNodes over an ObjectNode") {
    Json doc = Json::parse(kChainSchema);
    auto nodes = skops::collect_nodes(doc);
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[0].loader == "MethodNode");
    CHECK(nodes[0].func == "__builtins__");
    CHECK(nodes[0].chain_depth == 2);
    CHECK(nodes[1].loader == "MethodNode");
    CHECK(nodes[1].func == "decision_function");
    CHECK(nodes[1].chain_depth == 1);
    CHECK(nodes[2].loader == "ObjectNode");
    CHECK(nodes[2].node_id == 1);
    CHECK(nodes[2].locator == "/content/obj/content/obj");
}

TEST_CASE("operator schema parses to a single OperatorFuncNode") {
    Json doc = Json::parse(kOperatorSchema);
    auto nodes = skops::collect_nodes(doc);
    REQUIRE(nodes.size() == 1);
    CHECK(nodes[0].loader == "OperatorFuncNode");
    CHECK(nodes[0].class_name == "call");
    CHECK(nodes[0].module == "sklearn.SGDRegressor");
}

TEST_CASE("one trusted ObjectNode parses to a one-node tree") {
    Json doc = Json::parse(R"({"__class__": "int", "__module__": "builtins",
                               "__loader__": "ObjectNode"})");
    CHECK(skops::collect_nodes(doc).size() == 1);
}

TEST_CASE("attr traversal: func naming a dangerous dunder is unsafe") {
    Json doc = Json::parse(kChainSchema);
    auto nodes = skops::collect_nodes(doc);
    auto findings = skops::rule_methodnode(doc, nodes[0], kPolicy);
    REQUIRE(has_rule(findings, "SKOPS-ATTR-TRAVERSAL"));
    for (const auto& f : findings)
        if (f.rule_id == "SKOPS-ATTR-TRAVERSAL") {
            CHECK(f.severity == Severity::Unsafe);
            CHECK(f.evidence == "__builtins__");
        }
}

TEST_CASE("type mismatch: declared type differs from the target's declaration") {
    Json doc = Json::parse(kChainSchema);
    auto nodes = skops::collect_nodes(doc);
    // inner MethodNode declares builtins.int, its obj declares the sklearn type
    auto findings = skops::rule_methodnode(doc, nodes[1], kPolicy);
    REQUIRE(has_rule(findings, "SKOPS-TYPE-MISMATCH"));
    // outer MethodNode's obj declares builtins.int as well: no mismatch
    auto outer = skops::rule_methodnode(doc, nodes[0], kPolicy);
    CHECK_FALSE(has_rule(outer, "SKOPS-TYPE-MISMATCH"));
}

TEST_CASE("benign MethodNode with matching declared types raises nothing unsafe") {
    Json doc = Json::parse(R"({
      "__class__": "Pipeline", "__module__": "sklearn.pipeline",
      "__loader__": "MethodNode",
      "content": {
        "obj": {"__class__": "Pipeline", "__module__": "sklearn.pipeline",
                 "__loader__": "ObjectNode"},
        "func": "transform"
      }
    })");
    auto nodes = skops::collect_nodes(doc);
    auto findings = skops::rule_methodnode(doc, nodes[0], kPolicy);
    for (const auto& f : findings) CHECK(f.severity != Severity::Unsafe);
}

TEST_CASE("missing func field is malformed") {
    Json doc = Json::parse(R"({
      "__class__": "int", "__module__": "builtins", "__loader__": "MethodNode",
      "content": {}
    })");
    auto nodes = skops::collect_nodes(doc);
    auto findings = skops::rule_methodnode(doc, nodes[0], kPolicy);
    CHECK(has_rule(findings, "SKOPS-MALFORMED-NODE"));
}

TEST_CASE("deep MethodNode chains reach the policy threshold") {
    // three chained MethodNodes, threshold 3: fires on the head only
    Json doc = Json::parse(R"({
      "__class__": "int", "__module__": "builtins", "__loader__": "MethodNode",
      "content": {"obj": {
        "__class__": "int", "__module__": "builtins", "__loader__": "MethodNode",
        "content": {"obj": {
          "__class__": "int", "__module__": "builtins", "__loader__": "MethodNode",
          "content": {"obj": {"__class__": "int", "__module__": "builtins",
                               "__loader__": "ObjectNode"},
                      "func": "real"}
        }, "func": "real"}
      }, "func": "real"}
    })");
    auto nodes = skops::collect_nodes(doc);
    REQUIRE(nodes.size() == 4);
    CHECK(nodes[0].chain_depth == 3);
    auto findings = skops::rule_methodnode(doc, nodes[0], kPolicy);
    CHECK(has_rule(findings, "SKOPS-DEEP-CHAIN"));
    auto inner = skops::rule_methodnode(doc, nodes[1], kPolicy);
    CHECK_FALSE(has_rule(inner, "SKOPS-DEEP-CHAIN"));
}

TEST_CASE("operator spoof and dangerous call on the listing-4 node") {
    Json doc = Json::parse(kOperatorSchema);
    auto nodes = skops::collect_nodes(doc);
    auto findings = skops::rule_operatorfunc(nodes[0]);
    CHECK(has_rule(findings, "SKOPS-OPERATOR-SPOOF"));
    CHECK(has_rule(findings, "SKOPS-OPERATOR-DANGEROUS"));
}

TEST_CASE("compliant benign operator function is info only") {
    Json doc = Json::parse(R"({"__class__": "add", "__module__": "operator",
                               "__loader__": "OperatorFuncNode"})");
    auto nodes = skops::collect_nodes(doc);
    auto findings = skops::rule_operatorfunc(nodes[0]);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].rule_id == "SKOPS-OPERATOR-FUNC");
    CHECK(findings[0].severity == Severity::Info);
}

TEST_CASE("attrgetter is dangerous even with the compliant module") {
    Json doc = Json::parse(R"({"__class__": "attrgetter", "__module__": "operator",
                               "__loader__": "OperatorFuncNode"})");
    auto nodes = skops::collect_nodes(doc);
    auto findings = skops::rule_operatorfunc(nodes[0]);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].rule_id == "SKOPS-OPERATOR-DANGEROUS");
    CHECK_FALSE(has_rule(findings, "SKOPS-OPERATOR-SPOOF"));
}

TEST_CASE("untrusted enumeration covers the SV.1 fix concatenations") {
    Json doc = Json::parse(kChainSchema);
    auto untrusted = skops::enumerate_untrusted(doc, kPolicy.skops_trusted);
    std::set<std::string> types;
    for (const auto& t : untrusted) types.insert(t.type_string);
    CHECK(types.count("builtins.int.__builtins__") == 1);
    CHECK(types.count("builtins.int.decision_function") == 1);
    CHECK(types.count("sklearn.discriminant_analysis.QuadraticDiscriminantAnalysis") == 1);
    CHECK(types.count("builtins.int") == 0);  // in the default trusted set
}

TEST_CASE("enumeration deduplicates identical untrusted types keeping the first locator") {
    Json doc = Json::parse(R"({
      "__class__": "A", "__module__": "m", "__loader__": "ObjectNode",
      "content": {
        "x": {"__class__": "A", "__module__": "m", "__loader__": "ObjectNode"},
        "y": {"__class__": "A", "__module__": "m", "__loader__": "ObjectNode"}
      }
    })");
    auto untrusted = skops::enumerate_untrusted(doc, kPolicy.skops_trusted);
    REQUIRE(untrusted.size() == 1);
    CHECK(untrusted[0].type_string == "m.A");
    CHECK(untrusted[0].origin_locator == "");
}

TEST_CASE("trusted-only tree without MethodNodes enumerates nothing") {
    Json doc = Json::parse(R"({"__class__": "dict", "__module__": "builtins",
                               "__loader__": "DictNode", "content": {}})");
    CHECK(skops::enumerate_untrusted(doc, kPolicy.skops_trusted).empty());
}

TEST_CASE("unknown loader strings are reported, not ignored") {
    Json doc = Json::parse(R"({"__class__": "X", "__module__": "m",
                               "__loader__": "TotallyNewNode"})");
    auto findings = skops::analyze_schema(doc, kPolicy);
    CHECK(has_rule(findings, "SKOPS-UNKNOWN-LOADER"));
}

TEST_CASE("both paper poc schemas yield at least one unsafe finding") {
    for (const char* schema : {kChainSchema, kOperatorSchema}) {
        Json doc = Json::parse(schema);
        auto findings = skops::analyze_schema(doc, kPolicy);
        bool unsafe = false;
        for (const auto& f : findings)
            if (f.severity == Severity::Unsafe) unsafe = true;
        CHECK(unsafe);
    }
}

TEST_CASE("enumeration superset: unsafe nodes appear in the review list unless trusted") {
    for (const char* schema : {kChainSchema, kOperatorSchema}) {
        Json doc = Json::parse(schema);
        auto findings = skops::analyze_schema(doc, kPolicy);
        auto untrusted = skops::enumerate_untrusted(doc, kPolicy.skops_trusted);
        auto nodes = skops::collect_nodes(doc);

        std::set<std::string> review;
        for (const auto& t : untrusted) review.insert(t.type_string);

        for (const auto& f : findings) {
            if (f.severity != Severity::Unsafe) continue;
            const skops::Node* node = nullptr;
            for (const auto& n : nodes)
                if (n.locator == f.locator) node = &n;
            REQUIRE(node != nullptr);
            if (kPolicy.skops_trusted.count(node->type_string())) continue;
            bool listed = review.count(node->type_string()) > 0 ||
                          (node->func && review.count(node->type_string() + "." + *node->func));
            CHECK(listed);
        }
    }
}

TEST_CASE("archive parsing requires schema.json") {
    Bytes no_schema = zip::write_stored({{"readme.txt", to_bytes("x")}});
    CHECK_THROWS_AS((void)skops::parse_skops_archive(no_schema), ScanError);

    auto sv1 = corpus::gen_artifact(corpus::CaseId::Sv1);
    auto parsed = skops::parse_skops_archive(sv1.bytes);
    CHECK(parsed.nodes.size() == 3);
    CHECK(parsed.other_entries == std::vector<std::string>{"content/placeholder.bin"});
}

TEST_CASE("joblib fallback routing: name and content jointly") {
    CHECK(skops::route_non_zip_skops({Format::Pickle, 4}, "model.skops").has_value());
    CHECK(skops::route_non_zip_skops({Format::Unknown, 0}, "model.skops").has_value());
    CHECK(skops::route_non_zip_skops({Format::Hdf5, 0}, "model.skops").has_value());
    CHECK_FALSE(skops::route_non_zip_skops({Format::SkopsArchive, 0}, "model.skops").has_value());
    CHECK_FALSE(skops::route_non_zip_skops({Format::UnknownZip, 0}, "model.skops").has_value());
    CHECK_FALSE(skops::route_non_zip_skops({Format::Pickle, 4}, "model.pkl").has_value());
    CHECK_FALSE(skops::route_non_zip_skops({Format::Pickle, 4}, "skops").has_value());
}

TEST_CASE("parsing and rules never evaluate referenced attributes") {
    // structural check: analyzing the poc schemas is observationally pure;
    // the acceptance harness asserts the process-level guarantee
    Json doc = Json::parse(kChainSchema);
    auto before = doc.dump();
    (void)skops::analyze_schema(doc, kPolicy);
    CHECK(doc.dump() == before);
}
