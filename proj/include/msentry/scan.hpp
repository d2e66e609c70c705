#pragma once

#include <string>
#include <vector>

#include "msentry/policy.hpp"
#include "msentry/report.hpp"
#include "msentry/sniffer.hpp"

namespace msentry {

struct RouteResult {
    std::vector<Finding> findings;
    bool analyzed = false;
    std::vector<std::string> analyzers;
};

// Routing by sniffed content, with the single documented name-sensitive
// exception: a `.skops`-named non-ZIP also takes the joblib-fallback rule.
RouteResult route(const FormatKind& format, std::string_view logical_name, ByteSpan bytes,
                  const Policy& policy);

// Full per-file pipeline: sniff, route, aggregate. Analyzer hard failures
// become Label::Error, never an exception.
ScanReport scan_bytes(std::string input_name, ByteSpan bytes, const Policy& policy);

// Scans many buffers with up to `jobs` workers; reports come back in input
// order regardless of completion order.
struct ScanInput {
    std::string name;
    Bytes bytes;
};
std::vector<ScanReport> scan_many(const std::vector<ScanInput>& inputs, const Policy& policy,
                                  int jobs);

int label_exit_code(Label l);
int exit_code_for(const std::vector<ScanReport>& reports, bool permit_unsupported = false);

}  // namespace msentry
