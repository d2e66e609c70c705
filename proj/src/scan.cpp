#include "msentry/scan.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "msentry/keras.hpp"
#include "msentry/pickle.hpp"
#include "msentry/skops.hpp"

namespace msentry {

namespace {

std::vector<Finding> analyze_pickle(ByteSpan bytes, const Policy& policy) {
    pickle::Summary summary = pickle::disassemble(bytes);
    std::vector<Finding> findings =
        pickle::judge_imports(pickle::extract_imports(summary), policy);
    if (summary.truncated) {
        findings.push_back(make_finding(
            "PICKLE-TRUNCATED",
            summary.error.value_or("stream ended before STOP"),
            "offset:" + std::to_string(summary.error_offset), ""));
    }
    return findings;
}

}  // namespace

RouteResult route(const FormatKind& format, std::string_view logical_name, ByteSpan bytes,
                  const Policy& policy) {
    RouteResult out;

    switch (format.kind) {
        case Format::KerasV3Archive: {
            keras::ParsedArchive parsed = keras::parse_keras_archive(bytes);
            out.findings = keras::analyze_config(parsed.config, policy);
            if (parsed.has_schema_marker)
                out.findings.push_back(make_finding(
                    "SNIFF-AMBIGUOUS-ARCHIVE",
                    "archive carries both config.json and schema.json marker entries",
                    "schema.json", "schema.json"));
            out.analyzed = true;
            out.analyzers.push_back("keras");
            break;
        }
        case Format::SkopsArchive: {
            skops::ParsedSchema parsed = skops::parse_skops_archive(bytes);
            out.findings = skops::analyze_schema(parsed.schema, policy);
            out.analyzed = true;
            out.analyzers.push_back("skops");
            break;
        }
        case Format::Hdf5: {
            keras::LegacyScan legacy = keras::scan_legacy_h5(bytes, policy);
            out.findings = std::move(legacy.findings);
            out.analyzed = legacy.analyzed;
            out.analyzers.push_back("keras-legacy");
            break;
        }
        case Format::Pickle: {
            out.findings = analyze_pickle(bytes, policy);
            out.analyzed = true;
            out.analyzers.push_back("pickle");
            break;
        }
        case Format::UnknownZip:
        case Format::JsonDocument:
        case Format::ProtobufLike:
        case Format::Unknown:
            out.analyzed = false;
            break;
    }

    // SV.3: name + content jointly. Fires only for `.skops`-named non-ZIPs;
    // pickle findings (when the payload is a pickle) were already merged above.
    if (auto fallback = skops::route_non_zip_skops(format, logical_name)) {
        out.findings.push_back(std::move(*fallback));
        out.analyzed = true;
        out.analyzers.push_back("skops-route");
    }

    return out;
}

ScanReport scan_bytes(std::string input_name, ByteSpan bytes, const Policy& policy) {
    auto started = std::chrono::steady_clock::now();
    ScanReport report;
    report.input_name = std::move(input_name);

    SniffDetail detail = sniff_detailed(bytes);
    report.format = detail.format;

    try {
        RouteResult routed = route(detail.format, report.input_name, bytes, policy);
        report.findings = std::move(routed.findings);
        report.analyzers = std::move(routed.analyzers);
        if (detail.format.kind == Format::Unknown && detail.zip_issue && !routed.analyzed) {
            // Local-header magic with an unreadable central directory and no
            // other matching format: surface the structured parse error.
            report.error = *detail.zip_issue;
            report.label = Label::Error;
        } else {
            report.label = aggregate(report.findings, report.format, routed.analyzed);
        }
    } catch (const ScanError& e) {
        report.error = e.what();
        report.label = aggregate(report.findings, report.format, false, true);
    } catch (const std::exception& e) {
        report.error = std::string("internal analyzer failure: ") + e.what();
        report.label = aggregate(report.findings, report.format, false, true);
    }

    report.elapsed = std::chrono::steady_clock::now() - started;
    return report;
}

std::vector<ScanReport> scan_many(const std::vector<ScanInput>& inputs, const Policy& policy,
                                  int jobs) {
    std::vector<ScanReport> reports(inputs.size());
    if (inputs.empty()) return reports;

    jobs = std::clamp(jobs, 1, 64);
    jobs = std::min<int>(jobs, static_cast<int>(inputs.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= inputs.size()) return;
            reports[i] = scan_bytes(inputs[i].name, inputs[i].bytes, policy);
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return reports;
}

int label_exit_code(Label l) {
    switch (l) {
        case Label::Clean: return 0;
        case Label::Unsafe: return 1;
        case Label::Suspicious: return 2;
        case Label::Unsupported: return 4;
        case Label::Error: return 5;
    }
    return 5;
}

int exit_code_for(const std::vector<ScanReport>& reports, bool permit_unsupported) {
    bool any_error = false, any_unsafe = false, any_susp = false, any_unsup = false;
    for (const auto& r : reports) {
        switch (r.label) {
            case Label::Error: any_error = true; break;
            case Label::Unsafe: any_unsafe = true; break;
            case Label::Suspicious: any_susp = true; break;
            case Label::Unsupported: any_unsup = true; break;
            case Label::Clean: break;
        }
    }
    if (any_error) return 5;
    if (any_unsafe) return 1;
    if (any_susp) return 2;
    if (any_unsup) return permit_unsupported ? 0 : 4;
    return 0;
}

}  // namespace msentry
