#include "msentry/sniffer.hpp"

#include <cstring>

#include "json.hpp"
#include "msentry/pickle.hpp"

namespace msentry {

std::string format_name(const FormatKind& f) {
    switch (f.kind) {
        case Format::KerasV3Archive: return "keras-v3-archive";
        case Format::SkopsArchive: return "skops-archive";
        case Format::UnknownZip: return "unknown-zip";
        case Format::Hdf5: return "hdf5";
        case Format::Pickle: return "pickle-p" + std::to_string(f.pickle_protocol);
        case Format::JsonDocument: return "json-document";
        case Format::ProtobufLike: return "protobuf-like";
        case Format::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<FormatKind> format_from_name(std::string_view name) {
    if (name == "keras-v3-archive") return FormatKind{Format::KerasV3Archive, 0};
    if (name == "skops-archive") return FormatKind{Format::SkopsArchive, 0};
    if (name == "unknown-zip") return FormatKind{Format::UnknownZip, 0};
    if (name == "hdf5") return FormatKind{Format::Hdf5, 0};
    if (name == "json-document") return FormatKind{Format::JsonDocument, 0};
    if (name == "protobuf-like") return FormatKind{Format::ProtobufLike, 0};
    if (name == "unknown") return FormatKind{Format::Unknown, 0};
    if (name.rfind("pickle-p", 0) == 0 && name.size() == 9 && name[8] >= '0' && name[8] <= '5')
        return FormatKind{Format::Pickle, name[8] - '0'};
    return std::nullopt;
}

namespace {

bool is_hdf5(ByteSpan b) {
    return b.size() >= 8 && std::memcmp(b.data(), kHdf5Magic, 8) == 0;
}

bool parses_as_structured_json(ByteSpan b) {
    if (!nlohmann::json::accept(b.begin(), b.end())) return false;
    auto doc = nlohmann::json::parse(b.begin(), b.end(), nullptr, false);
    return doc.is_structured();
}

// Structured JSON document: first non-whitespace byte opens an object or
// array and the whole input parses. Bare scalars do not count.
bool is_json_document(ByteSpan b) {
    std::size_t i = 0;
    while (i < b.size() &&
           (b[i] == ' ' || b[i] == '\t' || b[i] == '\n' || b[i] == '\r'))
        ++i;
    if (i >= b.size()) return false;
    if (b[i] != '{' && b[i] != '[') return false;
    return nlohmann::json::accept(b.begin(), b.end());
}

// Best-effort protobuf wire-format check over the first 256 bytes: a run of
// well-formed tag/value pairs. Only ever used to say "Unsupported", so false
// positives degrade a verdict, never upgrade one.
bool looks_protobuf(ByteSpan b) {
    if (b.empty()) return false;
    std::size_t window = std::min<std::size_t>(b.size(), 256);
    std::size_t pos = 0;
    int fields = 0;

    auto varint = [&](std::size_t limit) -> std::optional<std::uint64_t> {
        std::uint64_t v = 0;
        int shift = 0;
        while (pos < limit && shift < 64) {
            std::uint8_t byte = b[pos++];
            v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
            if (!(byte & 0x80)) return v;
            shift += 7;
        }
        return std::nullopt;
    };

    while (pos < window) {
        auto tag = varint(b.size());
        if (!tag) return false;
        std::uint64_t field = *tag >> 3;
        std::uint32_t wire = static_cast<std::uint32_t>(*tag & 7);
        if (field == 0) return false;
        switch (wire) {
            case 0: {
                if (!varint(b.size())) return false;
                break;
            }
            case 1:
                if (pos + 8 > b.size()) return false;
                pos += 8;
                break;
            case 5:
                if (pos + 4 > b.size()) return false;
                pos += 4;
                break;
            case 2: {
                auto len = varint(b.size());
                if (!len || *len > b.size() - pos) return false;
                pos += static_cast<std::size_t>(*len);
                break;
            }
            default:
                return false;  // group wire types: treat as non-protobuf
        }
        ++fields;
        if (pos >= b.size()) break;
    }
    return fields >= 2 && pos >= 8;
}

}  // namespace

FormatKind classify_archive(const zip::Inventory& inventory, const EntryReader& entry_reader) {
    const zip::Entry* config = inventory.find("config.json");
    if (config) {
        Bytes doc = entry_reader(*config);
        if (parses_as_structured_json(doc)) return {Format::KerasV3Archive, 0};
    }
    const zip::Entry* schema = inventory.find("schema.json");
    if (schema) {
        Bytes doc = entry_reader(*schema);
        if (parses_as_structured_json(doc)) return {Format::SkopsArchive, 0};
    }
    return {Format::UnknownZip, 0};
}

SniffDetail sniff_detailed(ByteSpan bytes) {
    SniffDetail out{{Format::Unknown, 0}, std::nullopt};
    if (bytes.empty()) return out;

    // ZIP needs a parseable central directory, not just the local-header
    // magic, so a pickle with an embedded "PK\x03\x04" keeps falling through
    // to the pickle checks below.
    if (zip::has_local_magic(bytes)) {
        try {
            zip::Inventory inv = zip::read_inventory(bytes);
            out.format = classify_archive(
                inv, [&](const zip::Entry& e) { return zip::read_entry(bytes, e); });
            return out;
        } catch (const ZipError& e) {
            out.zip_issue = e.what();
        } catch (const std::exception& e) {
            out.zip_issue = e.what();
        }
    } else if (zip::is_empty_archive(bytes)) {
        out.format = {Format::UnknownZip, 0};
        return out;
    }

    if (is_hdf5(bytes)) {
        out.format = {Format::Hdf5, 0};
        return out;
    }

    if (bytes.size() >= 2 && bytes[0] == 0x80 && bytes[1] >= 2 && bytes[1] <= 5) {
        out.format = {Format::Pickle, bytes[1]};
        return out;
    }

    if (is_json_document(bytes)) {
        out.format = {Format::JsonDocument, 0};
        return out;
    }

    // Protocol 0/1 pickles carry no magic byte; a bounded opcode decode that
    // terminates in STOP is the tell.
    pickle::SniffResult ps = pickle::sniff_stream(bytes);
    if (ps.plausible) {
        out.format = {Format::Pickle, ps.protocol};
        return out;
    }

    if (looks_protobuf(bytes)) {
        out.format = {Format::ProtobufLike, 0};
        return out;
    }

    return out;
}

FormatKind sniff(ByteSpan bytes) { return sniff_detailed(bytes).format; }

}  // namespace msentry
