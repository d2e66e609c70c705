#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace msentry {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

inline ByteSpan as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteSpan b) {
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

inline std::uint16_t read_u16le(ByteSpan b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline std::uint32_t read_u32le(ByteSpan b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline std::uint64_t read_u64le(ByteSpan b, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[off + static_cast<std::size_t>(i)];
    return v;
}

inline void put_u16le(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32le(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void append(Bytes& out, ByteSpan b) { out.insert(out.end(), b.begin(), b.end()); }
inline void append(Bytes& out, std::string_view s) { out.insert(out.end(), s.begin(), s.end()); }

bool contains_bytes(ByteSpan haystack, ByteSpan needle);
std::optional<std::size_t> find_bytes(ByteSpan haystack, ByteSpan needle, std::size_t from = 0);

// Printable excerpt for reports: verbatim where printable, \xNN escapes otherwise.
std::string escape_excerpt(ByteSpan raw, std::size_t max_len = 256);

// Inverse of escape_excerpt for excerpts that were not length-truncated.
Bytes unescape_excerpt(std::string_view text);

std::optional<Bytes> base64_decode(std::string_view text);
std::string base64_encode(ByteSpan data);

std::uint32_t crc32_ieee(ByteSpan data);

}  // namespace msentry
