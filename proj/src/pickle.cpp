#include "msentry/pickle.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <unordered_map>

namespace msentry::pickle {

namespace {

// Argument encodings from the reference opcode table.
enum class ArgKind {
    None,
    U8,
    U16LE,
    I32LE,
    U32LE,
    U64LE,
    F64BE,
    DecimalNL,       // INT / GET / PUT
    DecimalLongNL,   // LONG (optional trailing 'L')
    FloatNL,
    StringNL,        // STRING: repr-quoted, escaped
    RawLine,         // PERSID
    RawLinePair,     // GLOBAL / INST: "module\nqualname\n"
    UnicodeNL,       // UNICODE: raw-unicode-escape
    Bytes1,
    Bytes4,
    Bytes8,
    String1,         // SHORT_BINSTRING (latin-1)
    String4,         // BINSTRING
    Utf8_1,
    Utf8_4,
    Utf8_8,
    Long1,
    Long4,
};

struct OpSpec {
    std::uint8_t code;
    std::string_view name;
    int proto;
    ArgKind arg;
};

// clang-format off
constexpr OpSpec kOps[] = {
    {0x28, "MARK",             0, ArgKind::None},
    {0x2e, "STOP",             0, ArgKind::None},
    {0x30, "POP",              0, ArgKind::None},
    {0x31, "POP_MARK",         0, ArgKind::None},
    {0x32, "DUP",              0, ArgKind::None},
    {0x46, "FLOAT",            0, ArgKind::FloatNL},
    {0x49, "INT",              0, ArgKind::DecimalNL},
    {0x4a, "BININT",           1, ArgKind::I32LE},
    {0x4b, "BININT1",          1, ArgKind::U8},
    {0x4c, "LONG",             0, ArgKind::DecimalLongNL},
    {0x4d, "BININT2",          1, ArgKind::U16LE},
    {0x4e, "NONE",             0, ArgKind::None},
    {0x50, "PERSID",           0, ArgKind::RawLine},
    {0x51, "BINPERSID",        1, ArgKind::None},
    {0x52, "REDUCE",           0, ArgKind::None},
    {0x53, "STRING",           0, ArgKind::StringNL},
    {0x54, "BINSTRING",        1, ArgKind::String4},
    {0x55, "SHORT_BINSTRING",  1, ArgKind::String1},
    {0x56, "UNICODE",          0, ArgKind::UnicodeNL},
    {0x58, "BINUNICODE",       1, ArgKind::Utf8_4},
    {0x61, "APPEND",           0, ArgKind::None},
    {0x62, "BUILD",            0, ArgKind::None},
    {0x63, "GLOBAL",           0, ArgKind::RawLinePair},
    {0x64, "DICT",             0, ArgKind::None},
    {0x7d, "EMPTY_DICT",       1, ArgKind::None},
    {0x65, "APPENDS",          0, ArgKind::None},
    {0x67, "GET",              0, ArgKind::DecimalNL},
    {0x68, "BINGET",           1, ArgKind::U8},
    {0x69, "INST",             0, ArgKind::RawLinePair},
    {0x6a, "LONG_BINGET",      1, ArgKind::U32LE},
    {0x6c, "LIST",             0, ArgKind::None},
    {0x5d, "EMPTY_LIST",       1, ArgKind::None},
    {0x6f, "OBJ",              0, ArgKind::None},
    {0x70, "PUT",              0, ArgKind::DecimalNL},
    {0x71, "BINPUT",           1, ArgKind::U8},
    {0x72, "LONG_BINPUT",      1, ArgKind::U32LE},
    {0x73, "SETITEM",          0, ArgKind::None},
    {0x74, "TUPLE",            0, ArgKind::None},
    {0x29, "EMPTY_TUPLE",      1, ArgKind::None},
    {0x75, "SETITEMS",         0, ArgKind::None},
    {0x47, "BINFLOAT",         1, ArgKind::F64BE},
    {0x80, "PROTO",            2, ArgKind::U8},
    {0x81, "NEWOBJ",           2, ArgKind::None},
    {0x82, "EXT1",             2, ArgKind::U8},
    {0x83, "EXT2",             2, ArgKind::U16LE},
    {0x84, "EXT4",             2, ArgKind::I32LE},
    {0x85, "TUPLE1",           2, ArgKind::None},
    {0x86, "TUPLE2",           2, ArgKind::None},
    {0x87, "TUPLE3",           2, ArgKind::None},
    {0x88, "NEWTRUE",          2, ArgKind::None},
    {0x89, "NEWFALSE",         2, ArgKind::None},
    {0x8a, "LONG1",            2, ArgKind::Long1},
    {0x8b, "LONG4",            2, ArgKind::Long4},
    {0x42, "BINBYTES",         3, ArgKind::Bytes4},
    {0x43, "SHORT_BINBYTES",   3, ArgKind::Bytes1},
    {0x8c, "SHORT_BINUNICODE", 4, ArgKind::Utf8_1},
    {0x8d, "BINUNICODE8",      4, ArgKind::Utf8_8},
    {0x8e, "BINBYTES8",        4, ArgKind::Bytes8},
    {0x8f, "EMPTY_SET",        4, ArgKind::None},
    {0x90, "ADDITEMS",         4, ArgKind::None},
    {0x91, "FROZENSET",        4, ArgKind::None},
    {0x92, "NEWOBJ_EX",        4, ArgKind::None},
    {0x93, "STACK_GLOBAL",     4, ArgKind::None},
    {0x94, "MEMOIZE",          4, ArgKind::None},
    {0x95, "FRAME",            4, ArgKind::U64LE},
    {0x96, "BYTEARRAY8",       5, ArgKind::Bytes8},
    {0x97, "NEXT_BUFFER",      5, ArgKind::None},
    {0x98, "READONLY_BUFFER",  5, ArgKind::None},
};
// clang-format on

const OpSpec* lookup(std::uint8_t code) {
    static const std::array<const OpSpec*, 256> table = [] {
        std::array<const OpSpec*, 256> t{};
        for (const auto& s : kOps) t[s.code] = &s;
        return t;
    }();
    return table[code];
}

// Op count cap so a gigabyte of one-byte opcodes cannot balloon the summary.
constexpr std::size_t kMaxOps = 2'000'000;

std::string unescape_string(std::string_view quoted) {
    // Python repr form: leading/trailing quote, backslash escapes.
    if (quoted.size() >= 2 && (quoted.front() == '\'' || quoted.front() == '"') &&
        quoted.back() == quoted.front())
        quoted = quoted.substr(1, quoted.size() - 2);
    std::string out;
    out.reserve(quoted.size());
    for (std::size_t i = 0; i < quoted.size(); ++i) {
        char ch = quoted[i];
        if (ch != '\\' || i + 1 >= quoted.size()) {
            out.push_back(ch);
            continue;
        }
        char esc = quoted[++i];
        switch (esc) {
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            case 't': out.push_back('\t'); break;
            case '0': out.push_back('\0'); break;
            case '\\': out.push_back('\\'); break;
            case '\'': out.push_back('\''); break;
            case '"': out.push_back('"'); break;
            case 'x': {
                int v = 0, digits = 0;
                while (digits < 2 && i + 1 < quoted.size() &&
                       std::isxdigit(static_cast<unsigned char>(quoted[i + 1]))) {
                    char d = quoted[++i];
                    v = v * 16 + (d <= '9' ? d - '0' : (d | 0x20) - 'a' + 10);
                    ++digits;
                }
                out.push_back(static_cast<char>(v));
                break;
            }
            default:
                out.push_back('\\');
                out.push_back(esc);
        }
    }
    return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string decode_raw_unicode_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    auto hexval = [](char d) { return d <= '9' ? d - '0' : (d | 0x20) - 'a' + 10; };
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 5 < s.size() && s[i + 1] == 'u') {
            std::uint32_t cp = 0;
            bool ok = true;
            for (int k = 0; k < 4; ++k) {
                char d = s[i + 2 + static_cast<std::size_t>(k)];
                if (!std::isxdigit(static_cast<unsigned char>(d))) {
                    ok = false;
                    break;
                }
                cp = cp * 16 + static_cast<std::uint32_t>(hexval(d));
            }
            if (ok) {
                append_utf8(out, cp);
                i += 5;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

// Symbolic stack token: just enough to resolve STACK_GLOBAL operands and
// REDUCE/NEWOBJ callables; everything else is opaque.
struct Token {
    enum Kind { Opaque, Str, NoneVal, Mark, Import } kind = Opaque;
    std::string text;
    int import_idx = -1;
};

struct Sim {
    std::vector<Token> stack;
    std::unordered_map<std::uint64_t, Token> memo;

    void push(Token t) {
        if (stack.size() < 1'000'000) stack.push_back(std::move(t));
    }
    Token pop() {
        if (stack.empty()) return {};
        Token t = std::move(stack.back());
        stack.pop_back();
        return t;
    }
    void pop_to_mark() {
        while (!stack.empty()) {
            bool was_mark = stack.back().kind == Token::Mark;
            stack.pop_back();
            if (was_mark) break;
        }
    }
    Token top() const { return stack.empty() ? Token{} : stack.back(); }
};

Summary decode_stream(ByteSpan data, std::size_t max_ops) {
    Summary out;
    std::size_t pos = 0;
    Sim sim;
    int max_tier = 0;
    std::optional<int> declared_proto;

    auto remaining = [&] { return data.size() - pos; };

    auto fail = [&](std::string msg, std::uint64_t at) {
        out.truncated = true;
        out.error = std::move(msg);
        out.error_offset = at;
    };

    auto read_line = [&]() -> std::optional<std::string> {
        auto it = std::find(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end(),
                            std::uint8_t('\n'));
        if (it == data.end()) return std::nullopt;
        std::size_t len = static_cast<std::size_t>(it - data.begin()) - pos;
        std::string line = to_string(data.subspan(pos, len));
        pos += len + 1;
        return line;
    };

    while (pos < data.size()) {
        if (out.ops.size() >= max_ops) {
            fail("opcode limit reached", pos);
            break;
        }
        std::uint64_t op_off = pos;
        std::uint8_t code = data[pos];
        const OpSpec* spec = lookup(code);
        if (!spec) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "unknown opcode 0x%02x", code);
            fail(buf, op_off);
            break;
        }
        pos += 1;
        max_tier = std::max(max_tier, spec->proto);

        Op op;
        op.name = spec->name;
        op.offset = op_off;

        bool short_read = false;
        std::string str_arg;
        std::string str_arg2;
        bool have_str = false;
        std::int64_t int_arg = 0;
        bool have_int = false;
        Bytes bytes_arg;
        bool have_bytes = false;

        auto read_fixed = [&](std::size_t n) -> bool {
            if (remaining() < n) {
                short_read = true;
                return false;
            }
            return true;
        };
        auto read_len_prefixed = [&](std::size_t len_width) -> std::optional<std::uint64_t> {
            if (remaining() < len_width) return std::nullopt;
            std::uint64_t n = 0;
            if (len_width == 1)
                n = data[pos];
            else if (len_width == 4)
                n = read_u32le(data, pos);
            else
                n = read_u64le(data, pos);
            pos += len_width;
            if (n > remaining()) return std::nullopt;
            return n;
        };

        switch (spec->arg) {
            case ArgKind::None:
                break;
            case ArgKind::U8:
                if (read_fixed(1)) {
                    int_arg = data[pos];
                    have_int = true;
                    pos += 1;
                }
                break;
            case ArgKind::U16LE:
                if (read_fixed(2)) {
                    int_arg = read_u16le(data, pos);
                    have_int = true;
                    pos += 2;
                }
                break;
            case ArgKind::I32LE:
                if (read_fixed(4)) {
                    int_arg = static_cast<std::int32_t>(read_u32le(data, pos));
                    have_int = true;
                    pos += 4;
                }
                break;
            case ArgKind::U32LE:
                if (read_fixed(4)) {
                    int_arg = read_u32le(data, pos);
                    have_int = true;
                    pos += 4;
                }
                break;
            case ArgKind::U64LE:
                if (read_fixed(8)) {
                    int_arg = static_cast<std::int64_t>(read_u64le(data, pos));
                    have_int = true;
                    pos += 8;
                }
                break;
            case ArgKind::F64BE:
                if (read_fixed(8)) {
                    std::uint64_t be = 0;
                    for (int k = 0; k < 8; ++k)
                        be = (be << 8) | data[pos + static_cast<std::size_t>(k)];
                    double d;
                    std::memcpy(&d, &be, sizeof d);
                    op.arg = d;
                    pos += 8;
                }
                break;
            case ArgKind::DecimalNL:
            case ArgKind::DecimalLongNL:
            case ArgKind::FloatNL:
            case ArgKind::RawLine: {
                auto line = read_line();
                if (!line) {
                    short_read = true;
                    break;
                }
                str_arg = *line;
                have_str = true;
                break;
            }
            case ArgKind::StringNL: {
                auto line = read_line();
                if (!line) {
                    short_read = true;
                    break;
                }
                str_arg = unescape_string(*line);
                have_str = true;
                break;
            }
            case ArgKind::RawLinePair: {
                auto l1 = read_line();
                auto l2 = l1 ? read_line() : std::nullopt;
                if (!l2) {
                    short_read = true;
                    break;
                }
                str_arg = *l1;
                str_arg2 = *l2;
                have_str = true;
                break;
            }
            case ArgKind::UnicodeNL: {
                auto line = read_line();
                if (!line) {
                    short_read = true;
                    break;
                }
                str_arg = decode_raw_unicode_escape(*line);
                have_str = true;
                break;
            }
            case ArgKind::String1:
            case ArgKind::Utf8_1:
            case ArgKind::String4:
            case ArgKind::Utf8_4:
            case ArgKind::Utf8_8: {
                std::size_t w = (spec->arg == ArgKind::String1 || spec->arg == ArgKind::Utf8_1) ? 1
                                : (spec->arg == ArgKind::Utf8_8)                                ? 8
                                                                                                : 4;
                auto n = read_len_prefixed(w);
                if (!n) {
                    short_read = true;
                    break;
                }
                str_arg = to_string(data.subspan(pos, static_cast<std::size_t>(*n)));
                have_str = true;
                pos += static_cast<std::size_t>(*n);
                break;
            }
            case ArgKind::Bytes1:
            case ArgKind::Bytes4:
            case ArgKind::Bytes8:
            case ArgKind::Long1:
            case ArgKind::Long4: {
                std::size_t w = (spec->arg == ArgKind::Bytes1 || spec->arg == ArgKind::Long1) ? 1
                                : (spec->arg == ArgKind::Bytes8)                              ? 8
                                                                                              : 4;
                auto n = read_len_prefixed(w);
                if (!n) {
                    short_read = true;
                    break;
                }
                auto sub = data.subspan(pos, static_cast<std::size_t>(*n));
                bytes_arg.assign(sub.begin(), sub.end());
                have_bytes = true;
                pos += static_cast<std::size_t>(*n);
                break;
            }
        }
        if (short_read) {
            fail("premature end of stream inside " + std::string(spec->name), op_off);
            break;
        }

        // Numeric line arguments must actually be numeric, otherwise arbitrary
        // ASCII would pass for protocol-0 opcodes.
        if (spec->arg == ArgKind::DecimalNL || spec->arg == ArgKind::DecimalLongNL ||
            spec->arg == ArgKind::FloatNL) {
            std::string_view t = str_arg;
            if (spec->arg == ArgKind::DecimalLongNL && !t.empty() &&
                (t.back() == 'L' || t.back() == 'l'))
                t.remove_suffix(1);
            std::size_t k = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
            bool ok = k < t.size();
            for (; ok && k < t.size(); ++k) {
                char ch = t[k];
                bool digit = ch >= '0' && ch <= '9';
                bool float_extra =
                    spec->arg == ArgKind::FloatNL &&
                    (ch == '.' || ch == 'e' || ch == 'E' || ch == '-' || ch == '+' || ch == 'n' ||
                     ch == 'a' || ch == 'i' || ch == 'f');
                if (!digit && !float_extra) ok = false;
            }
            if (!ok) {
                fail("malformed numeric literal in " + std::string(spec->name), op_off);
                break;
            }
        }

        if (have_int)
            op.arg = int_arg;
        else if (have_str && spec->arg == ArgKind::RawLinePair)
            op.arg = str_arg + " " + str_arg2;
        else if (have_str)
            op.arg = str_arg;
        else if (have_bytes)
            op.arg = bytes_arg;
        out.ops.push_back(op);

        auto record_call_target = [&](const Token& callee) {
            if (callee.kind == Token::Import && callee.import_idx >= 0) {
                ImportRef target = out.imports[static_cast<std::size_t>(callee.import_idx)];
                target.origin = ImportOrigin::ReduceTarget;
                target.offset = op_off;
                out.imports.push_back(target);
            }
        };

        switch (code) {
            case 0x28: sim.push({Token::Mark, "", -1}); break;           // MARK
            case 0x2e: out.stop_reached = true; break;                   // STOP
            case 0x30: sim.pop(); break;                                 // POP
            case 0x31: sim.pop_to_mark(); break;                         // POP_MARK
            case 0x32: sim.push(sim.top()); break;                       // DUP
            case 0x4e: sim.push({Token::NoneVal, "", -1}); break;        // NONE
            case 0x53: case 0x56: case 0x54: case 0x55: case 0x58:       // string constants
            case 0x8c: case 0x8d:
                sim.push({Token::Str, str_arg, -1});
                break;
            case 0x63: {  // GLOBAL
                out.imports.push_back({str_arg, str_arg2, ImportOrigin::Global, op_off, false});
                sim.push({Token::Import, "", static_cast<int>(out.imports.size() - 1)});
                break;
            }
            case 0x69: {  // INST: records the import, consumes mark slice, builds instance
                out.imports.push_back({str_arg, str_arg2, ImportOrigin::Global, op_off, false});
                sim.pop_to_mark();
                sim.push({});
                break;
            }
            case 0x93: {  // STACK_GLOBAL
                Token qual = sim.pop();
                Token mod = sim.pop();
                ImportRef ref;
                ref.origin = ImportOrigin::StackGlobal;
                ref.offset = op_off;
                if (mod.kind == Token::Str && qual.kind == Token::Str) {
                    ref.module = mod.text;
                    ref.qualname = qual.text;
                } else {
                    ref.module = "<dynamic>";
                    ref.qualname = "<dynamic>";
                    ref.dynamic = true;
                }
                out.imports.push_back(ref);
                sim.push({Token::Import, "", static_cast<int>(out.imports.size() - 1)});
                break;
            }
            case 0x52: {  // REDUCE
                sim.pop();
                record_call_target(sim.pop());
                sim.push({});
                break;
            }
            case 0x81: {  // NEWOBJ
                sim.pop();
                record_call_target(sim.pop());
                sim.push({});
                break;
            }
            case 0x92: {  // NEWOBJ_EX
                sim.pop();
                sim.pop();
                record_call_target(sim.pop());
                sim.push({});
                break;
            }
            case 0x6f:  // OBJ
                sim.pop_to_mark();
                sim.push({});
                break;
            case 0x74: case 0x6c: case 0x64: case 0x91:  // TUPLE LIST DICT FROZENSET
                sim.pop_to_mark();
                sim.push({});
                break;
            case 0x65: case 0x75: case 0x90:  // APPENDS SETITEMS ADDITEMS
                sim.pop_to_mark();
                break;
            case 0x85: sim.pop(); sim.push({}); break;                           // TUPLE1
            case 0x86: sim.pop(); sim.pop(); sim.push({}); break;                // TUPLE2
            case 0x87: sim.pop(); sim.pop(); sim.pop(); sim.push({}); break;     // TUPLE3
            case 0x61: sim.pop(); break;                                         // APPEND
            case 0x73: sim.pop(); sim.pop(); break;                              // SETITEM
            case 0x62: sim.pop(); break;                                         // BUILD
            case 0x50: sim.push({}); break;                                      // PERSID
            case 0x51: sim.pop(); sim.push({}); break;                           // BINPERSID
            case 0x70: {  // PUT (decimal line)
                std::uint64_t idx = std::strtoull(str_arg.c_str(), nullptr, 10);
                sim.memo[idx] = sim.top();
                break;
            }
            case 0x71: case 0x72: {  // BINPUT / LONG_BINPUT
                sim.memo[static_cast<std::uint64_t>(int_arg)] = sim.top();
                break;
            }
            case 0x94:  // MEMOIZE
                sim.memo[sim.memo.size()] = sim.top();
                break;
            case 0x67: {  // GET (decimal line)
                std::uint64_t idx = std::strtoull(str_arg.c_str(), nullptr, 10);
                auto it = sim.memo.find(idx);
                sim.push(it != sim.memo.end() ? it->second : Token{});
                break;
            }
            case 0x68: case 0x6a: {  // BINGET / LONG_BINGET
                auto it = sim.memo.find(static_cast<std::uint64_t>(int_arg));
                sim.push(it != sim.memo.end() ? it->second : Token{});
                break;
            }
            case 0x80:  // PROTO
                declared_proto = static_cast<int>(int_arg);
                break;
            case 0x46: case 0x49: case 0x4c: case 0x4a: case 0x4b: case 0x4d: case 0x47:
            case 0x88: case 0x89: case 0x8a: case 0x8b:
            case 0x42: case 0x43: case 0x8e: case 0x8f: case 0x96:
            case 0x5d: case 0x29: case 0x7d: case 0x97:
            case 0x82: case 0x83: case 0x84:
                sim.push({});
                break;
            default:
                break;  // FRAME, READONLY_BUFFER: no stack effect
        }

        if (out.stop_reached) break;
    }

    if (!out.stop_reached && !out.error) {
        out.truncated = true;
        out.error = "stream ended before STOP";
        out.error_offset = pos;
    }

    out.protocol = declared_proto ? *declared_proto : max_tier;
    return out;
}

}  // namespace

Summary disassemble(ByteSpan data) { return decode_stream(data, kMaxOps); }

std::vector<ImportRef> extract_imports(const Summary& summary) { return summary.imports; }

std::vector<Finding> judge_imports(const std::vector<ImportRef>& imports, const Policy& policy) {
    std::vector<Finding> findings;
    std::set<std::string> emitted;

    auto emit = [&](std::string_view rule, const ImportRef& ref, std::string msg) {
        std::string key = std::string(rule) + "|" + ref.fqn();
        if (!emitted.insert(key).second) return;
        findings.push_back(make_finding(rule, std::move(msg),
                                        "offset:" + std::to_string(ref.offset),
                                        ref.dynamic ? "" : ref.qualname));
    };

    for (const auto& ref : imports) {
        if (ref.dynamic) {
            emit("PICKLE-DYNAMIC-GLOBAL", ref,
                 "STACK_GLOBAL resolves its target from non-constant operands");
            continue;
        }
        std::string fqn = ref.fqn();
        if (ref.origin == ImportOrigin::ReduceTarget) {
            if (policy.pickle_dangerous(fqn))
                emit("PICKLE-DANGEROUS-REDUCE", ref, "load-time call of " + fqn);
            continue;
        }
        if (policy.pickle_dangerous(fqn)) {
            emit("PICKLE-DANGEROUS-IMPORT", ref, "import of " + fqn);
        } else if (!policy.pickle_allowlisted(fqn)) {
            emit("PICKLE-UNKNOWN-IMPORT", ref, "import of " + fqn + " is not allowlisted");
        }
    }
    return findings;
}

SniffResult sniff_stream(ByteSpan data, std::size_t screen_ops) {
    SniffResult r;
    if (data.size() < 2) return r;

    // Cheap screen first: the leading opcodes must decode cleanly before we
    // commit to a full pass over the stream.
    Summary s = decode_stream(data, screen_ops);
    if (!s.stop_reached) {
        if (s.error && *s.error != "opcode limit reached") return r;
        s = decode_stream(data, kMaxOps);
    }
    if (!s.stop_reached || s.error) return r;
    if (s.ops.size() < 2) return r;  // a bare STOP is not a pickle
    if (s.protocol < 0 || s.protocol > 5) return r;
    r.plausible = true;
    r.protocol = s.protocol;
    return r;
}

}  // namespace msentry::pickle
