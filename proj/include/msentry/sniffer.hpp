#pragma once

#include <functional>
#include <optional>
#include <string>

#include "msentry/bytes.hpp"
#include "msentry/zip.hpp"

namespace msentry {

enum class Format {
    KerasV3Archive,
    SkopsArchive,
    UnknownZip,
    Hdf5,
    Pickle,
    JsonDocument,
    ProtobufLike,
    Unknown,
};

struct FormatKind {
    Format kind = Format::Unknown;
    int pickle_protocol = 0;  // meaningful only when kind == Pickle

    bool operator==(const FormatKind&) const = default;

    bool is_zip() const {
        return kind == Format::KerasV3Archive || kind == Format::SkopsArchive ||
               kind == Format::UnknownZip;
    }
};

std::string format_name(const FormatKind& f);
std::optional<FormatKind> format_from_name(std::string_view name);

// Content-only format identification. Total: never throws, any bytes map to
// exactly one FormatKind. Filenames are not an input by construction.
FormatKind sniff(ByteSpan bytes);

// Extended result for the scan pipeline: when the input wears the ZIP local
// header but its central directory cannot be parsed (or violates caps), the
// issue is carried along so the scan can report it if nothing else matches.
struct SniffDetail {
    FormatKind format;
    std::optional<std::string> zip_issue;
};
SniffDetail sniff_detailed(ByteSpan bytes);

// Archive subtype classification. `entry_reader` maps an entry name to its
// decompressed bytes. Precondition: the inventory came from a parseable
// central directory.
using EntryReader = std::function<Bytes(const zip::Entry&)>;
FormatKind classify_archive(const zip::Inventory& inventory, const EntryReader& entry_reader);

inline constexpr std::uint8_t kHdf5Magic[8] = {0x89, 'H', 'D', 'F', 0x0D, 0x0A, 0x1A, 0x0A};

}  // namespace msentry
