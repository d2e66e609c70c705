#pragma once

#include <string>
#include <vector>

#include "msentry/bytes.hpp"
#include "msentry/policy.hpp"
#include "msentry/zip.hpp"

namespace msentry::corpus {

// Synthesizable evaluation cases. kv3 doubles as the malicious-Lambda HDF5
// baseline: they are the same bytes by construction.
enum class CaseId {
    Kv1,
    Kv2,
    Kv3,
    Sv1,
    Sv2,
    Sv3,
    BenignLambdaKeras,
    BenignLambdaH5,
    MaliciousLambdaKeras,
    NoLambdaKeras,
    NoLambdaH5,
};

struct CorpusCase {
    CaseId id;
    std::string name;       // short id used in file names ("kv1", ...)
    std::string file_name;  // "<case>.<ext>"
    Label expected_label;
    std::vector<std::string> expected_rules;  // rules that must fire
    std::string description;
};

const std::vector<CorpusCase>& all_cases();

struct Artifact {
    std::string file_name;
    Bytes bytes;
};

// Byte-deterministic generation: fixed timestamps, fixed entry order, no
// randomness. Same case id produces identical bytes on every run.
Artifact gen_artifact(CaseId id);

// Re-exported archive writer (stored method, fixed DOS timestamp).
using zip::write_stored;

// Minimal HDF5-signature container embedding a model_config document the
// legacy heuristic can locate. Not a conformant HDF5 file.
Bytes emit_h5_like(ByteSpan config_document);

// JSON manifest mapping case -> file, expected label and rules.
Bytes manifest();

}  // namespace msentry::corpus
