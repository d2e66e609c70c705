#include "msentry/corpus.hpp"

#include "json.hpp"

namespace msentry::corpus {

namespace {

using Json = nlohmann::ordered_json;

// Synthetic stand-ins for marshalled Lambda bytecode. The dangerous variant
// embeds the identifier bytes a real payload would carry; neither is runnable
// code.
const std::string kBenignBlob =
    std::string("SYNTH-CODE\x01") + "identity\nlambda_identity\nreturns input unchanged";
const std::string kMaliciousBlob =
    std::string("SYNTH-CODE\x01") + "posix_spawn\n/bin/sh\n-c";

const char* kMetadataJson = R"({"keras_version": "3.8.0", "date_saved": "1980-01-01@00:00:00"})";

// Listing-shaped malicious module resolution: subprocess.run interpreted as a
// model layer, argument wired through the computation graph.
const char* kKv1Config = R"({
  "module": "keras",
  "class_name": "Functional",
  "config": {
    "name": "model",
    "layers": [
      {
        "module": "keras.layers",
        "class_name": "InputLayer",
        "config": {"batch_shape": [null, 4], "dtype": "float32", "name": "input_layer"},
        "registered_name": null,
        "name": "input_layer",
        "inbound_nodes": []
      },
      {
        "module": "subprocess",
        "class_name": "run",
        "inbound_nodes": [
          {
            "args": ["/bin/sh"],
            "kwargs": {}
          }
        ]
      }
    ]
  }
})";

// Lambda reusing an internal global-state setter to flip safe mode off.
const char* kKv2Config = R"({
  "module": "keras",
  "class_name": "Functional",
  "config": {
    "name": "model",
    "layers": [
      {
        "module": "keras.layers",
        "class_name": "InputLayer",
        "config": {"batch_shape": [null, 4], "dtype": "float32", "name": "input_layer"},
        "registered_name": null,
        "name": "input_layer",
        "inbound_nodes": []
      },
      {
        "module": "keras.layers",
        "class_name": "Lambda",
        "config": {
          "name": "set_global_state",
          "function": {
            "module": "keras.src.backend.common.global_state",
            "class_name": "function",
            "config": "set_global_attribute",
            "registered_name": "function"
          },
          "arguments": {
            "value": false
          }
        },
        "name": "set_global_state",
        "inbound_nodes": [
          {
            "args": [],
            "kwargs": {"inputs": "safe_mode_saving"}
          }
        ]
      }
    ]
  }
})";

const char* kSv1Schema = R"({
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

const char* kSv2Schema = R"({
  "__class__": "call",
  "__module__": "sklearn.SGDRegressor",
  "__loader__": "OperatorFuncNode"
})";

std::string lambda_config(const std::string& payload) {
    Json doc;
    doc["module"] = "keras";
    doc["class_name"] = "Functional";
    doc["config"]["name"] = "model";
    Json input = Json::object();
    input["module"] = "keras.layers";
    input["class_name"] = "InputLayer";
    input["config"] = {{"batch_shape", {nullptr, 4}}, {"dtype", "float32"},
                       {"name", "input_layer"}};
    input["registered_name"] = nullptr;
    input["name"] = "input_layer";
    input["inbound_nodes"] = Json::array();

    Json lam = Json::object();
    lam["module"] = "keras.layers";
    lam["class_name"] = "Lambda";
    lam["config"]["name"] = "lambda";
    lam["config"]["function"] = {
        {"class_name", "__lambda__"},
        {"config", {{"code", base64_encode(as_bytes(payload))},
                    {"defaults", nullptr},
                    {"closure", nullptr}}},
    };
    lam["name"] = "lambda";
    lam["inbound_nodes"] = Json::array({{{"args", Json::array()}, {"kwargs", Json::object()}}});

    doc["config"]["layers"] = Json::array({std::move(input), std::move(lam)});
    return doc.dump(2);
}

std::string no_lambda_config() {
    Json doc;
    doc["module"] = "keras";
    doc["class_name"] = "Functional";
    doc["config"]["name"] = "mlp";
    Json input = Json::object();
    input["module"] = "keras.layers";
    input["class_name"] = "InputLayer";
    input["config"] = {{"batch_shape", {nullptr, 4}}, {"dtype", "float32"},
                       {"name", "input_layer"}};
    input["registered_name"] = nullptr;
    input["name"] = "input_layer";
    input["inbound_nodes"] = Json::array();

    Json dense = Json::object();
    dense["module"] = "keras.layers";
    dense["class_name"] = "Dense";
    dense["config"] = {{"name", "dense"}, {"units", 8}, {"activation", "relu"}};
    dense["registered_name"] = nullptr;
    dense["name"] = "dense";
    dense["inbound_nodes"] = Json::array({{{"args", Json::array()}, {"kwargs", Json::object()}}});

    doc["config"]["layers"] = Json::array({std::move(input), std::move(dense)});
    return doc.dump(2);
}

Bytes weights_placeholder() {
    Bytes w = {0x89, 'H', 'D', 'F', 0x0D, 0x0A, 0x1A, 0x0A};
    w.resize(32, 0);
    return w;
}

Bytes keras_archive(const std::string& config) {
    std::vector<zip::EntrySpec> entries;
    entries.push_back({"metadata.json", to_bytes(kMetadataJson)});
    entries.push_back({"config.json", to_bytes(config)});
    entries.push_back({"model.weights.h5", weights_placeholder()});
    return zip::write_stored(entries);
}

Bytes skops_archive(const std::string& schema) {
    std::vector<zip::EntrySpec> entries;
    entries.push_back({"schema.json", to_bytes(schema)});
    entries.push_back({"content/placeholder.bin", Bytes{}});
    return zip::write_stored(entries);
}

// Hand-assembled protocol-4 stream mirroring pickle.dumps of a reduce call:
// posix.system("/bin/sh"). Nothing here is executed by anything in this
// repository; it exists so the pickle route has a realistic positive case.
Bytes sv3_pickle() {
    Bytes body;
    auto short_unicode = [&](std::string_view s) {
        body.push_back(0x8c);
        body.push_back(static_cast<std::uint8_t>(s.size()));
        append(body, s);
        body.push_back(0x94);  // MEMOIZE
    };
    short_unicode("posix");
    short_unicode("system");
    body.push_back(0x93);  // STACK_GLOBAL
    body.push_back(0x94);
    short_unicode("/bin/sh");
    body.push_back(0x85);  // TUPLE1
    body.push_back(0x94);
    body.push_back(0x52);  // REDUCE
    body.push_back(0x94);
    body.push_back(0x2e);  // STOP

    Bytes out = {0x80, 0x04};  // PROTO 4
    out.push_back(0x95);       // FRAME
    std::uint64_t len = body.size();
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((len >> (8 * i)) & 0xff));
    append(out, ByteSpan(body));
    return out;
}

}  // namespace

Bytes emit_h5_like(ByteSpan config_document) {
    Bytes out = {0x89, 'H', 'D', 'F', 0x0D, 0x0A, 0x1A, 0x0A};
    out.resize(16, 0);  // minimal superblock stand-in
    append(out, std::string_view("keras_version"));
    out.push_back(0);
    append(out, std::string_view("2.15.0"));
    out.push_back(0);
    append(out, std::string_view("model_config"));
    out.push_back(0);
    append(out, config_document);
    out.push_back(0);
    return out;
}

const std::vector<CorpusCase>& all_cases() {
    static const std::vector<CorpusCase> kCases = {
        {CaseId::Kv1, "kv1", "kv1.keras", Label::Unsafe,
         {"KERAS-UNTRUSTED-MODULE"},
         "insecure module resolution: subprocess.run as a layer"},
        {CaseId::Kv2, "kv2", "kv2.keras", Label::Unsafe,
         {"KERAS-GADGET-REUSE"},
         "Lambda reuses internal global-state setter to disable safe mode"},
        {CaseId::Kv3, "kv3", "kv3.h5", Label::Unsafe,
         {"KERAS-LAMBDA-BYTECODE-DANGEROUS", "KERAS-LEGACY-FORMAT"},
         "legacy HDF5 with malicious Lambda bytecode (same bytes as the M-L HDF5 baseline)"},
        {CaseId::Sv1, "sv1", "sv1.skops", Label::Unsafe,
         {"SKOPS-ATTR-TRAVERSAL", "SKOPS-TYPE-MISMATCH"},
         "MethodNode chain traverses to __builtins__"},
        {CaseId::Sv2, "sv2", "sv2.skops", Label::Unsafe,
         {"SKOPS-OPERATOR-SPOOF", "SKOPS-OPERATOR-DANGEROUS"},
         "OperatorFuncNode validates one module, invokes operator.call"},
        {CaseId::Sv3, "sv3", "sv3.skops", Label::Unsafe,
         {"SKOPS-JOBLIB-FALLBACK", "PICKLE-DANGEROUS-IMPORT"},
         "pickle masquerading as .skops; joblib fallback path"},
        {CaseId::BenignLambdaKeras, "benign_lambda_keras", "benign_lambda_keras.keras",
         Label::Suspicious,
         {"KERAS-LAMBDA-BYTECODE"},
         "benign Lambda bytecode (B-L baseline): suspicious, not unsafe"},
        {CaseId::BenignLambdaH5, "benign_lambda_h5", "benign_lambda_h5.h5", Label::Suspicious,
         {"KERAS-LAMBDA-BYTECODE", "KERAS-LEGACY-FORMAT"},
         "benign Lambda bytecode in legacy HDF5 (B-L baseline)"},
        {CaseId::MaliciousLambdaKeras, "malicious_lambda_keras", "malicious_lambda_keras.keras",
         Label::Unsafe,
         {"KERAS-LAMBDA-BYTECODE-DANGEROUS"},
         "Lambda bytecode embedding /bin/sh identifiers (M-L baseline)"},
        {CaseId::NoLambdaKeras, "no_lambda_keras", "no_lambda_keras.keras", Label::Clean, {},
         "plain dense model, no Lambda (NL baseline)"},
        {CaseId::NoLambdaH5, "no_lambda_h5", "no_lambda_h5.h5", Label::Clean,
         {"KERAS-LEGACY-FORMAT"},
         "plain dense model in legacy HDF5 (NL baseline); info note only"},
    };
    return kCases;
}

Artifact gen_artifact(CaseId id) {
    for (const CorpusCase& c : all_cases()) {
        if (c.id != id) continue;
        switch (id) {
            case CaseId::Kv1: return {c.file_name, keras_archive(kKv1Config)};
            case CaseId::Kv2: return {c.file_name, keras_archive(kKv2Config)};
            case CaseId::Kv3:
                return {c.file_name, emit_h5_like(as_bytes(lambda_config(kMaliciousBlob)))};
            case CaseId::Sv1: return {c.file_name, skops_archive(kSv1Schema)};
            case CaseId::Sv2: return {c.file_name, skops_archive(kSv2Schema)};
            case CaseId::Sv3: return {c.file_name, sv3_pickle()};
            case CaseId::BenignLambdaKeras:
                return {c.file_name, keras_archive(lambda_config(kBenignBlob))};
            case CaseId::BenignLambdaH5:
                return {c.file_name, emit_h5_like(as_bytes(lambda_config(kBenignBlob)))};
            case CaseId::MaliciousLambdaKeras:
                return {c.file_name, keras_archive(lambda_config(kMaliciousBlob))};
            case CaseId::NoLambdaKeras:
                return {c.file_name, keras_archive(no_lambda_config())};
            case CaseId::NoLambdaH5:
                return {c.file_name, emit_h5_like(as_bytes(no_lambda_config()))};
        }
    }
    throw std::invalid_argument("unknown corpus case");
}

Bytes manifest() {
    Json doc;
    Json cases = Json::array();
    for (const CorpusCase& c : all_cases()) {
        Json jc;
        jc["case"] = c.name;
        jc["file"] = c.file_name;
        jc["expected_label"] = std::string(label_name(c.expected_label));
        jc["expected_rules"] = c.expected_rules;
        jc["description"] = c.description;
        cases.push_back(std::move(jc));
    }
    doc["cases"] = std::move(cases);
    std::string text = doc.dump(2);
    text.push_back('\n');
    return to_bytes(text);
}

}  // namespace msentry::corpus
