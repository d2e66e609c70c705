#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msentry/bytes.hpp"
#include "msentry/errors.hpp"

namespace msentry::zip {

// Hard caps applied while reading the central directory. Anything beyond is
// rejected as a classification error rather than quietly accepted.
inline constexpr std::uint64_t kMaxEntries = 65535;
inline constexpr std::uint64_t kMaxEntrySize = 4ull * 1024 * 1024 * 1024;  // declared, per entry

struct Entry {
    std::string name;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    std::uint32_t crc32 = 0;
    std::uint16_t method = 0;  // 0 = stored, 8 = deflate
    std::uint64_t local_header_offset = 0;
};

struct Inventory {
    std::vector<Entry> entries;

    const Entry* find(std::string_view name) const;
    bool has(std::string_view name) const { return find(name) != nullptr; }
};

bool has_local_magic(ByteSpan file);      // "PK\x03\x04" at offset 0
bool is_empty_archive(ByteSpan file);     // bare end-of-central-directory record

// Parses the central directory. Throws ZipError (with byte offset) on a
// corrupt directory, duplicate entry names, or cap violations.
Inventory read_inventory(ByteSpan file);

// Extracts one entry (stored or deflate). Verifies declared sizes and CRC-32.
Bytes read_entry(ByteSpan file, const Entry& entry);

// Deterministic writer: stored method only, fixed DOS timestamp 1980-01-01.
struct EntrySpec {
    std::string name;
    Bytes data;
};
Bytes write_stored(const std::vector<EntrySpec>& entries);

}  // namespace msentry::zip
