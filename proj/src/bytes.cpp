#include "msentry/bytes.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace msentry {

std::optional<std::size_t> find_bytes(ByteSpan haystack, ByteSpan needle, std::size_t from) {
    if (needle.empty() || from > haystack.size()) return std::nullopt;
    auto it = std::search(haystack.begin() + static_cast<std::ptrdiff_t>(from), haystack.end(),
                          needle.begin(), needle.end());
    if (it == haystack.end()) return std::nullopt;
    return static_cast<std::size_t>(it - haystack.begin());
}

bool contains_bytes(ByteSpan haystack, ByteSpan needle) {
    return find_bytes(haystack, needle).has_value();
}

std::string escape_excerpt(ByteSpan raw, std::size_t max_len) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    std::size_t n = std::min(raw.size(), max_len);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t c = raw[i];
        if (c >= 0x20 && c < 0x7f && c != '\\') {
            out.push_back(static_cast<char>(c));
        } else if (c == '\\') {
            out += "\\\\";
        } else {
            out += "\\x";
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xf]);
        }
    }
    if (raw.size() > max_len) out += "...";
    return out;
}

Bytes unescape_excerpt(std::string_view text) {
    auto hexval = [](char d) { return d <= '9' ? d - '0' : (d | 0x20) - 'a' + 10; };
    Bytes out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != '\\' || i + 1 >= text.size()) {
            out.push_back(static_cast<std::uint8_t>(c));
            continue;
        }
        char esc = text[++i];
        if (esc == '\\') {
            out.push_back('\\');
        } else if (esc == 'x' && i + 2 < text.size()) {
            int v = hexval(text[i + 1]) * 16 + hexval(text[i + 2]);
            out.push_back(static_cast<std::uint8_t>(v));
            i += 2;
        } else {
            out.push_back('\\');
            out.push_back(static_cast<std::uint8_t>(esc));
        }
    }
    return out;
}

std::optional<Bytes> base64_decode(std::string_view text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    Bytes out;
    int acc = 0;
    int bits = 0;
    std::size_t pad = 0;
    for (char c : text) {
        if (c == '\n' || c == '\r' || c == ' ') continue;
        if (c == '=') {
            ++pad;
            continue;
        }
        if (pad > 0) return std::nullopt;  // data after padding
        int v = value_of(c);
        if (v < 0) return std::nullopt;
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    if (pad > 2) return std::nullopt;
    return out;
}

std::string base64_encode(ByteSpan data) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
    }
    if (i + 1 == data.size()) {
        std::uint32_t v = data[i] << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == data.size()) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out += "=";
    }
    return out;
}

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
        table[i] = c;
    }
    return table;
}

}  // namespace

std::uint32_t crc32_ieee(ByteSpan data) {
    static const auto table = make_crc_table();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::uint8_t b : data) crc = table[(crc ^ b) & 0xff] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

}  // namespace msentry
