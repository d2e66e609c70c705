#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "msentry/bytes.hpp"
#include "msentry/policy.hpp"

namespace msentry::pickle {

// Decoded opcode argument. Large integers (LONG/LONG4) keep their decimal text.
using OpArg = std::variant<std::int64_t, double, std::string, Bytes>;

struct Op {
    std::string_view name;  // mnemonic from the static opcode table
    std::uint64_t offset = 0;
    std::optional<OpArg> arg;
};

enum class ImportOrigin { Global, StackGlobal, ReduceTarget };

struct ImportRef {
    std::string module;
    std::string qualname;
    ImportOrigin origin = ImportOrigin::Global;
    std::uint64_t offset = 0;
    bool dynamic = false;  // STACK_GLOBAL whose operands were not tracked string constants

    std::string fqn() const { return module + "." + qualname; }
};

struct Summary {
    std::vector<Op> ops;
    std::vector<ImportRef> imports;
    bool truncated = false;               // decode stopped before STOP
    std::optional<std::string> error;     // what stopped it (unknown opcode, short read)
    std::uint64_t error_offset = 0;
    int protocol = 0;                     // PROTO argument, else highest opcode tier seen
    bool stop_reached = false;
};

// Static disassembly: decodes opcodes and resolves import references without
// ever materializing an object. Total over arbitrary bytes.
Summary disassemble(ByteSpan data);

// Import list of a summary (already populated by disassemble; re-exposed so
// callers can work from the summary alone).
std::vector<ImportRef> extract_imports(const Summary& summary);

std::vector<Finding> judge_imports(const std::vector<ImportRef>& imports, const Policy& policy);

// Bounded decode used by the sniffer: is this byte sequence a plausible pickle
// stream, and at which protocol? Checks the first `screen_ops` opcodes, then
// requires a clean run to STOP.
struct SniffResult {
    bool plausible = false;
    int protocol = 0;
};
SniffResult sniff_stream(ByteSpan data, std::size_t screen_ops = 64);

}  // namespace msentry::pickle
