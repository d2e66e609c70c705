#include "msentry/report.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace msentry {

Label aggregate(const std::vector<Finding>& findings, const FormatKind&, bool analyzed,
                bool hard_failure) {
    if (hard_failure) return Label::Error;
    if (!analyzed) return Label::Unsupported;
    bool suspicious = false;
    for (const Finding& f : findings) {
        if (f.severity == Severity::Unsafe) return Label::Unsafe;
        if (f.severity == Severity::Suspicious) suspicious = true;
    }
    return suspicious ? Label::Suspicious : Label::Clean;
}

namespace {

using Json = nlohmann::ordered_json;

std::vector<const Finding*> sorted_findings(const ScanReport& report) {
    std::vector<const Finding*> fs;
    fs.reserve(report.findings.size());
    for (const auto& f : report.findings) fs.push_back(&f);
    std::stable_sort(fs.begin(), fs.end(), [](const Finding* a, const Finding* b) {
        if (a->locator != b->locator) return a->locator < b->locator;
        return a->rule_id < b->rule_id;
    });
    return fs;
}

std::string severity_str(Severity s) { return std::string(severity_name(s)); }

Json machine_json(const ScanReport& report) {
    Json doc;
    doc["input"] = report.input_name;
    doc["format"] = format_name(report.format);
    doc["label"] = std::string(label_name(report.label));
    doc["analyzers"] = report.analyzers;
    Json findings = Json::array();
    for (const Finding* f : sorted_findings(report)) {
        Json jf;
        jf["rule_id"] = f->rule_id;
        jf["severity"] = severity_str(f->severity);
        jf["message"] = f->message;
        jf["locator"] = f->locator;
        jf["evidence"] = escape_excerpt(as_bytes(f->evidence));
        jf["analyzer"] = f->analyzer;
        findings.push_back(std::move(jf));
    }
    doc["findings"] = std::move(findings);
    if (report.error) doc["error"] = *report.error;
    doc["scanner_version"] = report.scanner_version;
    return doc;
}

std::string human_text(const ScanReport& report) {
    std::ostringstream out;
    out << report.input_name << "\n";
    out << "  format:      " << format_name(report.format) << "\n";
    out << "  label:       " << label_name(report.label) << "\n";
    out << "  analyzed by: ";
    if (report.analyzers.empty()) {
        out << "(none)";
    } else {
        for (std::size_t i = 0; i < report.analyzers.size(); ++i)
            out << (i ? ", " : "") << report.analyzers[i];
    }
    out << "\n";
    if (report.error) out << "  error:       " << *report.error << "\n";
    auto fs = sorted_findings(report);
    if (!fs.empty()) {
        out << "  findings:\n";
        for (const Finding* f : fs) {
            out << "    [" << severity_str(f->severity) << "] " << f->rule_id;
            if (!f->locator.empty()) out << " at " << f->locator;
            out << "\n      " << f->message << "\n";
            if (!f->evidence.empty())
                out << "      evidence: " << escape_excerpt(as_bytes(f->evidence), 80) << "\n";
        }
    }
    return out.str();
}

}  // namespace

Bytes render(const ScanReport& report, RenderMode mode) {
    switch (mode) {
        case RenderMode::HumanText: {
            std::string text = human_text(report);
            return to_bytes(text);
        }
        case RenderMode::MachineStructured: {
            std::string text = machine_json(report).dump();
            text.push_back('\n');
            return to_bytes(text);
        }
        case RenderMode::AnalysisInterchange: {
            return render_interchange({report});
        }
    }
    return {};
}

ScanReport parse_machine_report(ByteSpan document) {
    Json doc = Json::parse(document.begin(), document.end());
    ScanReport r;
    r.input_name = doc.at("input").get<std::string>();
    auto fmt = format_from_name(doc.at("format").get<std::string>());
    if (!fmt) throw ScanError("unknown format name in report");
    r.format = *fmt;
    std::string lbl = doc.at("label").get<std::string>();
    bool found = false;
    for (Label l : {Label::Clean, Label::Suspicious, Label::Unsafe, Label::Unsupported,
                    Label::Error}) {
        if (label_name(l) == lbl) {
            r.label = l;
            found = true;
            break;
        }
    }
    if (!found) throw ScanError("unknown label in report");
    r.analyzers = doc.at("analyzers").get<std::vector<std::string>>();
    for (const auto& jf : doc.at("findings")) {
        Finding f;
        f.rule_id = jf.at("rule_id").get<std::string>();
        for (Severity s : {Severity::Info, Severity::Suspicious, Severity::Unsafe})
            if (severity_name(s) == jf.at("severity").get<std::string>()) f.severity = s;
        f.message = jf.at("message").get<std::string>();
        f.locator = jf.at("locator").get<std::string>();
        Bytes raw = unescape_excerpt(jf.at("evidence").get<std::string>());
        f.evidence.assign(raw.begin(), raw.end());
        f.analyzer = jf.at("analyzer").get<std::string>();
        r.findings.push_back(std::move(f));
    }
    if (doc.contains("error")) r.error = doc.at("error").get<std::string>();
    r.scanner_version = doc.at("scanner_version").get<std::string>();
    return r;
}

Bytes render_interchange(const std::vector<ScanReport>& reports, bool include_info) {
    Json sarif;
    sarif["$schema"] =
        "https://raw.githubusercontent.com/oasis-tcs/sarif-spec/master/Schemata/sarif-schema-2.1.0.json";
    sarif["version"] = "2.1.0";

    Json driver;
    driver["name"] = std::string(kScannerName);
    driver["version"] = std::string(kScannerVersion);
    driver["informationUri"] = "https://example.invalid/msentry";

    // Rule metadata only for rules that actually appear, in catalog order.
    std::set<std::string> used;
    for (const auto& r : reports)
        for (const auto& f : r.findings)
            if (include_info || f.severity != Severity::Info) used.insert(f.rule_id);
    Json rules = Json::array();
    for (const RuleInfo& ri : rule_catalog()) {
        if (!used.count(std::string(ri.id))) continue;
        Json jr;
        jr["id"] = std::string(ri.id);
        jr["shortDescription"]["text"] = std::string(ri.description);
        if (!ri.references.empty()) jr["helpUri"] = "https://www.cve.org/";
        rules.push_back(std::move(jr));
    }
    driver["rules"] = std::move(rules);

    Json results = Json::array();
    for (const auto& report : reports) {
        std::vector<const Finding*> fs;
        for (const auto& f : report.findings)
            if (include_info || f.severity != Severity::Info) fs.push_back(&f);
        std::stable_sort(fs.begin(), fs.end(), [](const Finding* a, const Finding* b) {
            if (a->locator != b->locator) return a->locator < b->locator;
            return a->rule_id < b->rule_id;
        });
        for (const Finding* f : fs) {
            Json res;
            res["ruleId"] = f->rule_id;
            res["level"] = f->severity == Severity::Unsafe        ? "error"
                           : f->severity == Severity::Suspicious ? "warning"
                                                                 : "note";
            res["message"]["text"] = f->message;
            Json loc;
            loc["physicalLocation"]["artifactLocation"]["uri"] = report.input_name;
            if (!f->locator.empty())
                loc["logicalLocations"] = Json::array({{{"fullyQualifiedName", f->locator}}});
            res["locations"] = Json::array({std::move(loc)});
            results.push_back(std::move(res));
        }
    }

    Json run;
    run["tool"]["driver"] = std::move(driver);
    run["results"] = std::move(results);
    sarif["runs"] = Json::array({std::move(run)});

    std::string text = sarif.dump(2);
    text.push_back('\n');
    return to_bytes(text);
}

}  // namespace msentry
