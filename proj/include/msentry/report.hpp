#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "msentry/policy.hpp"
#include "msentry/sniffer.hpp"

namespace msentry {

inline constexpr std::string_view kScannerName = "msentry";
inline constexpr std::string_view kScannerVersion = "0.1.0";

struct ScanReport {
    std::string input_name;
    FormatKind format;
    std::vector<Finding> findings;
    Label label = Label::Unsupported;
    std::vector<std::string> analyzers;      // which analyzers actually ran
    std::optional<std::string> error;        // analyzer hard-failure message
    std::chrono::duration<double, std::milli> elapsed{0};
    std::string scanner_version{kScannerVersion};
};

// Most-severe-wins aggregation. `analyzed == false` means no compatible
// analyzer ran: the answer is Unsupported, never Clean. Info findings do not
// lift the label.
Label aggregate(const std::vector<Finding>& findings, const FormatKind& format, bool analyzed,
                bool hard_failure = false);

enum class RenderMode { HumanText, MachineStructured, AnalysisInterchange };

// Deterministic rendering. Machine output is a canonical JSON document whose
// findings are ordered by (locator, rule_id); elapsed time is excluded so
// identical reports render byte-identically.
Bytes render(const ScanReport& report, RenderMode mode);

// Lossless counterpart of the machine rendering.
ScanReport parse_machine_report(ByteSpan document);

// One SARIF document covering several reports (one run per invocation).
Bytes render_interchange(const std::vector<ScanReport>& reports, bool include_info = true);

}  // namespace msentry
