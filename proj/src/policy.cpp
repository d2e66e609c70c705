#include "msentry/policy.hpp"

#include <algorithm>

#include "json.hpp"

namespace msentry {

std::string_view severity_name(Severity s) {
    switch (s) {
        case Severity::Info: return "info";
        case Severity::Suspicious: return "suspicious";
        case Severity::Unsafe: return "unsafe";
    }
    return "info";
}

std::string_view label_name(Label l) {
    switch (l) {
        case Label::Clean: return "clean";
        case Label::Suspicious: return "suspicious";
        case Label::Unsafe: return "unsafe";
        case Label::Unsupported: return "unsupported";
        case Label::Error: return "error";
    }
    return "error";
}

namespace {

// clang-format off
const std::vector<RuleInfo> kCatalog = {
    {"SNIFF-AMBIGUOUS-ARCHIVE", Severity::Suspicious, "sniffer",
     "archive carries both config.json and schema.json marker entries", ""},
    {"PICKLE-DANGEROUS-IMPORT", Severity::Unsafe, "pickle",
     "pickle imports a known code-execution primitive", "CVE-2025-54886"},
    {"PICKLE-UNKNOWN-IMPORT", Severity::Suspicious, "pickle",
     "pickle imports a symbol outside the configured allowlist", ""},
    {"PICKLE-DYNAMIC-GLOBAL", Severity::Suspicious, "pickle",
     "STACK_GLOBAL operands are not plain string constants", ""},
    {"PICKLE-DANGEROUS-REDUCE", Severity::Unsafe, "pickle",
     "REDUCE/NEWOBJ invokes a dangerous callable at load time", "CVE-2025-54886"},
    {"PICKLE-TRUNCATED", Severity::Suspicious, "pickle",
     "stream could not be decoded to STOP (truncated or unknown opcode)", ""},
    {"KERAS-UNTRUSTED-MODULE", Severity::Unsafe, "keras",
     "layer config resolves a module outside the trusted prefix list", "CVE-2025-1550"},
    {"KERAS-GADGET-REUSE", Severity::Unsafe, "keras",
     "Lambda references a blocklisted internal utility (execution gadget)",
     "CVE-2025-8747, CVE-2025-9906"},
    {"KERAS-LAMBDA-BYTECODE-DANGEROUS", Severity::Unsafe, "keras",
     "serialized Lambda bytecode embeds known dangerous identifiers", "CVE-2025-9905"},
    {"KERAS-LAMBDA-BYTECODE", Severity::Suspicious, "keras",
     "Lambda carries serialized bytecode (content not verifiable statically)", "CVE-2025-9905"},
    {"KERAS-LAMBDA-REF", Severity::Suspicious, "keras",
     "Lambda references a function by name (weakest Lambda signal)", ""},
    {"KERAS-LAMBDA-MALFORMED", Severity::Suspicious, "keras",
     "Lambda function descriptor missing or undecodable", ""},
    {"KERAS-REGISTERED-NAME", Severity::Suspicious, "keras",
     "config relies on a custom registered object type", ""},
    {"KERAS-DEPTH-BOMB", Severity::Suspicious, "keras",
     "config nesting exceeds the walk depth cap; walk truncated", ""},
    {"KERAS-LEGACY-FORMAT", Severity::Info, "keras-legacy",
     "legacy HDF5 model; safe_mode historically not enforced for this format", "CVE-2025-9905"},
    {"KERAS-LEGACY-UNPARSEABLE", Severity::Suspicious, "keras-legacy",
     "embedded model_config document present but unparseable", ""},
    {"SKOPS-ATTR-TRAVERSAL", Severity::Unsafe, "skops",
     "MethodNode accesses a dangerous double-underscore attribute", "CVE-2025-54413"},
    {"SKOPS-TYPE-MISMATCH", Severity::Unsafe, "skops",
     "MethodNode declared type differs from its target object's declared type",
     "CVE-2025-54413"},
    {"SKOPS-DEEP-CHAIN", Severity::Suspicious, "skops",
     "MethodNode chain depth at or above the policy threshold", "CVE-2025-54413"},
    {"SKOPS-MALFORMED-NODE", Severity::Suspicious, "skops",
     "loader node missing required fields", ""},
    {"SKOPS-OPERATOR-SPOOF", Severity::Unsafe, "skops",
     "OperatorFuncNode declares a module other than 'operator'", "CVE-2025-54412"},
    {"SKOPS-OPERATOR-DANGEROUS", Severity::Unsafe, "skops",
     "OperatorFuncNode names an operator that can invoke arbitrary targets",
     "CVE-2025-54412"},
    {"SKOPS-OPERATOR-FUNC", Severity::Info, "skops",
     "OperatorFuncNode present (module 'operator', benign function)", ""},
    {"SKOPS-UNKNOWN-LOADER", Severity::Suspicious, "skops",
     "schema uses a loader kind this scanner does not recognize", ""},
    {"SKOPS-UNTRUSTED-TYPE", Severity::Info, "skops",
     "type outside the trusted set; requires review before loading", ""},
    {"SKOPS-JOBLIB-FALLBACK", Severity::Unsafe, "skops",
     ".skops file is not a ZIP archive; loaders fall back to pickle-based joblib",
     "CVE-2025-54886"},
};
// clang-format on

}  // namespace

const std::vector<RuleInfo>& rule_catalog() { return kCatalog; }

const RuleInfo* rule_info(std::string_view rule_id) {
    for (const auto& r : kCatalog)
        if (r.id == rule_id) return &r;
    return nullptr;
}

Finding make_finding(std::string_view rule_id, std::string message, std::string locator,
                     std::string evidence) {
    const RuleInfo* info = rule_info(rule_id);
    Finding f;
    f.rule_id = std::string(rule_id);
    f.severity = info ? info->severity : Severity::Suspicious;
    f.analyzer = info ? std::string(info->analyzer) : "unknown";
    f.message = std::move(message);
    f.locator = std::move(locator);
    f.evidence = std::move(evidence);
    if (f.evidence.size() > 256) f.evidence.resize(256);
    return f;
}

bool module_prefix_match(std::string_view module, std::string_view prefix) {
    if (prefix.empty()) return false;
    if (module == prefix) return true;
    return module.size() > prefix.size() && module.substr(0, prefix.size()) == prefix &&
           module[prefix.size()] == '.';
}

Policy Policy::defaults() {
    Policy p;
    p.keras_allowlist = {"keras"};
    p.gadget_blocklist = {
        "keras.src.backend.common.global_state.set_global_attribute",
        "keras.src.backend.common.global_state.clear_session",
        "keras.src.saving.saving_lib.load_model",
        "keras.src.saving.saving_api.load_model",
        "keras.saving.load_model",
        "keras.models.load_model",
        "keras.src.utils.file_utils.get_file",
        "keras.utils.get_file",
        "keras.src.saving.serialization_lib.deserialize_keras_object",
        "keras.layers.deserialize",
    };
    p.pickle_danger_list = {
        // process spawning / shell
        "os.system", "os.popen", "os.execv", "os.execve", "os.execvp", "os.execvpe",
        "os.execl", "os.spawnl", "os.spawnv", "os.spawnve", "os.posix_spawn", "os.kill",
        "posix.system", "posix.popen", "nt.system", "pty.spawn",
        "subprocess.run", "subprocess.call", "subprocess.check_call",
        "subprocess.check_output", "subprocess.Popen", "subprocess.getoutput",
        "subprocess.getstatusoutput",
        // eval / exec / dynamic import
        "builtins.eval", "builtins.exec", "builtins.compile", "builtins.__import__",
        "builtins.getattr", "builtins.open",
        "__builtin__.eval", "__builtin__.exec", "__builtin__.open", "__builtin__.getattr",
        "importlib.import_module", "importlib.__import__", "runpy.run_module",
        "operator.attrgetter",
        "ctypes.CDLL",
        // file removal
        "os.remove", "os.unlink", "os.rmdir", "shutil.rmtree",
        // network dial
        "socket.socket", "socket.create_connection",
        "http.client.HTTPConnection", "http.client.HTTPSConnection",
        "urllib.request.urlopen", "urllib.request.urlretrieve",
    };
    p.pickle_allowlist = std::nullopt;
    p.skops_trusted = {
        "builtins.int", "builtins.float", "builtins.complex", "builtins.str",
        "builtins.bool", "builtins.bytes", "builtins.bytearray", "builtins.list",
        "builtins.tuple", "builtins.dict", "builtins.set", "builtins.frozenset",
        "builtins.NoneType",
    };
    p.dunder_danger = {
        "__builtins__", "__globals__", "__class__", "__subclasses__",
        "__bases__", "__mro__", "__import__", "__getattribute__",
    };
    p.chain_depth_threshold = 3;
    p.bytecode_patterns = {
        "/bin/sh", "/bin/bash", "cmd.exe", "subprocess", "os.system", "posix_spawn",
        "pty.spawn", "eval", "exec", "__import__", "socket", "urlopen",
    };
    return p;
}

bool Policy::pickle_dangerous(std::string_view fqn) const {
    return std::find(pickle_danger_list.begin(), pickle_danger_list.end(), fqn) !=
           pickle_danger_list.end();
}

bool Policy::pickle_allowlisted(std::string_view fqn) const {
    if (!pickle_allowlist) return false;
    return std::find(pickle_allowlist->begin(), pickle_allowlist->end(), fqn) !=
           pickle_allowlist->end();
}

bool Policy::keras_module_allowed(std::string_view module) const {
    return std::any_of(keras_allowlist.begin(), keras_allowlist.end(),
                       [&](const std::string& p) { return module_prefix_match(module, p); });
}

bool Policy::gadget_blocked(std::string_view fqn) const {
    return std::find(gadget_blocklist.begin(), gadget_blocklist.end(), fqn) !=
           gadget_blocklist.end();
}

bool Policy::dunder_dangerous(std::string_view attr) const {
    return std::find(dunder_danger.begin(), dunder_danger.end(), attr) != dunder_danger.end();
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& v, const std::string& key) {
    if (!v.is_array()) throw PolicyError("policy field '" + key + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string())
            throw PolicyError("policy field '" + key + "' must contain only strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

Policy load_policy(ByteSpan document) {
    Policy p = Policy::defaults();
    // Empty (or whitespace-only) document keeps every default.
    bool blank = true;
    for (std::uint8_t c : document)
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r') { blank = false; break; }
    if (blank) return p;

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document.begin(), document.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw PolicyError(std::string("malformed policy document: ") + e.what());
    }
    if (!doc.is_object()) throw PolicyError("policy document root must be an object");

    for (const auto& [key, value] : doc.items()) {
        if (key == "keras_allowlist") {
            p.keras_allowlist = string_list(value, key);
        } else if (key == "gadget_blocklist") {
            p.gadget_blocklist = string_list(value, key);
        } else if (key == "pickle_danger_list") {
            p.pickle_danger_list = string_list(value, key);
        } else if (key == "pickle_allowlist") {
            if (value.is_null())
                p.pickle_allowlist = std::nullopt;
            else
                p.pickle_allowlist = string_list(value, key);
        } else if (key == "skops_trusted") {
            auto v = string_list(value, key);
            p.skops_trusted = std::set<std::string>(v.begin(), v.end());
        } else if (key == "dunder_danger") {
            p.dunder_danger = string_list(value, key);
        } else if (key == "chain_depth_threshold") {
            if (!value.is_number_integer())
                throw PolicyError("policy field 'chain_depth_threshold' must be an integer");
            p.chain_depth_threshold = value.get<int>();
            if (p.chain_depth_threshold < 1)
                throw PolicyError("policy field 'chain_depth_threshold' must be >= 1");
        } else if (key == "bytecode_patterns") {
            p.bytecode_patterns = string_list(value, key);
        } else {
            throw PolicyError("unknown policy field: '" + key + "'");
        }
    }
    return p;
}

}  // namespace msentry
