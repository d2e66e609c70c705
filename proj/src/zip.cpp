#include "msentry/zip.hpp"

#include <zlib.h>

#include <algorithm>
#include <set>

namespace msentry::zip {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;

constexpr std::size_t kLocalHeaderLen = 30;
constexpr std::size_t kCentralHeaderLen = 46;
constexpr std::size_t kEndRecordLen = 22;

Bytes inflate_raw(ByteSpan compressed, std::uint64_t expected_size, std::uint64_t offset) {
    Bytes out(expected_size);
    z_stream strm{};
    if (inflateInit2(&strm, -MAX_WBITS) != Z_OK)
        throw ZipError("inflate initialization failed", offset);
    strm.next_in = const_cast<Bytef*>(compressed.data());
    strm.avail_in = static_cast<uInt>(compressed.size());
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&strm, Z_FINISH);
    std::uint64_t produced = strm.total_out;
    inflateEnd(&strm);
    if (rc != Z_STREAM_END || produced != expected_size)
        throw ZipError("deflate stream does not match declared size", offset);
    return out;
}

}  // namespace

const Entry* Inventory::find(std::string_view name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

bool has_local_magic(ByteSpan file) {
    return file.size() >= 4 && read_u32le(file, 0) == kLocalSig;
}

bool is_empty_archive(ByteSpan file) {
    return file.size() >= kEndRecordLen && read_u32le(file, 0) == kEndSig &&
           read_u16le(file, 10) == 0;
}

Inventory read_inventory(ByteSpan file) {
    if (file.size() < kEndRecordLen) throw ZipError("file too small for an archive", 0);

    // End record: last kEndSig whose comment length reaches exactly to EOF.
    std::size_t scan_floor =
        file.size() > kEndRecordLen + 65535 ? file.size() - kEndRecordLen - 65535 : 0;
    std::optional<std::size_t> end_off;
    for (std::size_t pos = file.size() - kEndRecordLen + 1; pos-- > scan_floor;) {
        if (read_u32le(file, pos) != kEndSig) continue;
        std::uint16_t comment_len = read_u16le(file, pos + 20);
        if (pos + kEndRecordLen + comment_len == file.size()) {
            end_off = pos;
            break;
        }
    }
    if (!end_off) throw ZipError("end-of-central-directory record not found", file.size());

    std::size_t eo = *end_off;
    if (read_u16le(file, eo + 4) != 0 || read_u16le(file, eo + 6) != 0)
        throw ZipError("multi-disk archives are unsupported", eo + 4);
    std::uint64_t total_entries = read_u16le(file, eo + 10);
    if (read_u16le(file, eo + 8) != total_entries)
        throw ZipError("central directory split across disks", eo + 8);
    if (total_entries > kMaxEntries) throw ZipError("too many archive entries", eo + 10);
    std::uint64_t cd_size = read_u32le(file, eo + 12);
    std::uint64_t cd_offset = read_u32le(file, eo + 16);
    if (cd_offset + cd_size > eo)
        throw ZipError("central directory overlaps end record", eo + 12);

    Inventory inv;
    inv.entries.reserve(total_entries);
    std::set<std::string> seen;
    std::uint64_t pos = cd_offset;
    for (std::uint64_t i = 0; i < total_entries; ++i) {
        if (pos + kCentralHeaderLen > eo)
            throw ZipError("central directory truncated", pos);
        if (read_u32le(file, pos) != kCentralSig)
            throw ZipError("bad central directory entry signature", pos);

        Entry e;
        std::uint16_t flags = read_u16le(file, pos + 8);
        e.method = read_u16le(file, pos + 10);
        e.crc32 = read_u32le(file, pos + 16);
        e.compressed_size = read_u32le(file, pos + 20);
        e.uncompressed_size = read_u32le(file, pos + 24);
        std::uint16_t name_len = read_u16le(file, pos + 28);
        std::uint16_t extra_len = read_u16le(file, pos + 30);
        std::uint16_t comment_len = read_u16le(file, pos + 32);
        e.local_header_offset = read_u32le(file, pos + 42);

        if (flags & 0x0001) throw ZipError("encrypted entries are unsupported", pos + 8);
        if (e.compressed_size == 0xFFFFFFFFull || e.uncompressed_size == 0xFFFFFFFFull ||
            e.local_header_offset == 0xFFFFFFFFull)
            throw ZipError("zip64 archives are unsupported", pos + 20);
        if (e.uncompressed_size > kMaxEntrySize)
            throw ZipError("declared entry size exceeds the 4 GiB cap", pos + 24);
        if (e.method != 0 && e.method != 8)
            throw ZipError("unsupported compression method " + std::to_string(e.method),
                           pos + 10);
        if (pos + kCentralHeaderLen + name_len > eo)
            throw ZipError("entry name runs past central directory", pos + 28);
        e.name = to_string(file.subspan(pos + kCentralHeaderLen, name_len));
        if (!seen.insert(e.name).second)
            throw ZipError("duplicate entry name: " + e.name, pos + kCentralHeaderLen);
        if (e.local_header_offset + kLocalHeaderLen > file.size())
            throw ZipError("local header offset out of range", pos + 42);

        inv.entries.push_back(std::move(e));
        pos += kCentralHeaderLen + name_len + extra_len + comment_len;
    }
    if (pos != cd_offset + cd_size)
        throw ZipError("central directory size mismatch", pos);
    return inv;
}

Bytes read_entry(ByteSpan file, const Entry& entry) {
    std::uint64_t lho = entry.local_header_offset;
    if (lho + kLocalHeaderLen > file.size()) throw ZipError("local header out of range", lho);
    if (read_u32le(file, lho) != kLocalSig) throw ZipError("bad local header signature", lho);
    std::uint16_t name_len = read_u16le(file, lho + 26);
    std::uint16_t extra_len = read_u16le(file, lho + 28);
    std::uint64_t data_off = lho + kLocalHeaderLen + name_len + extra_len;
    if (data_off + entry.compressed_size > file.size())
        throw ZipError("entry data runs past end of file", data_off);

    ByteSpan raw = file.subspan(data_off, entry.compressed_size);
    Bytes data;
    if (entry.method == 0) {
        if (entry.compressed_size != entry.uncompressed_size)
            throw ZipError("stored entry with mismatched sizes", data_off);
        data.assign(raw.begin(), raw.end());
    } else {
        data = inflate_raw(raw, entry.uncompressed_size, data_off);
    }
    if (crc32_ieee(data) != entry.crc32)
        throw ZipError("entry CRC-32 mismatch for " + entry.name, data_off);
    return data;
}

Bytes write_stored(const std::vector<EntrySpec>& entries) {
    std::set<std::string> seen;
    for (const auto& e : entries)
        if (!seen.insert(e.name).second)
            throw std::invalid_argument("duplicate archive entry name: " + e.name);

    // 1980-01-01 00:00:00 in DOS date/time encoding.
    constexpr std::uint16_t kDosTime = 0;
    constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;

    Bytes out;
    std::vector<std::uint64_t> offsets;
    offsets.reserve(entries.size());
    for (const auto& e : entries) {
        offsets.push_back(out.size());
        std::uint32_t crc = crc32_ieee(e.data);
        put_u32le(out, kLocalSig);
        put_u16le(out, 20);  // version needed
        put_u16le(out, 0);   // flags
        put_u16le(out, 0);   // stored
        put_u16le(out, kDosTime);
        put_u16le(out, kDosDate);
        put_u32le(out, crc);
        put_u32le(out, static_cast<std::uint32_t>(e.data.size()));
        put_u32le(out, static_cast<std::uint32_t>(e.data.size()));
        put_u16le(out, static_cast<std::uint16_t>(e.name.size()));
        put_u16le(out, 0);  // extra
        append(out, e.name);
        append(out, ByteSpan(e.data));
    }

    std::uint64_t cd_start = out.size();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        std::uint32_t crc = crc32_ieee(e.data);
        put_u32le(out, kCentralSig);
        put_u16le(out, 20);  // version made by
        put_u16le(out, 20);  // version needed
        put_u16le(out, 0);
        put_u16le(out, 0);
        put_u16le(out, kDosTime);
        put_u16le(out, kDosDate);
        put_u32le(out, crc);
        put_u32le(out, static_cast<std::uint32_t>(e.data.size()));
        put_u32le(out, static_cast<std::uint32_t>(e.data.size()));
        put_u16le(out, static_cast<std::uint16_t>(e.name.size()));
        put_u16le(out, 0);  // extra
        put_u16le(out, 0);  // comment
        put_u16le(out, 0);  // disk
        put_u16le(out, 0);  // internal attrs
        put_u32le(out, 0);  // external attrs
        put_u32le(out, static_cast<std::uint32_t>(offsets[i]));
        append(out, e.name);
    }
    std::uint64_t cd_size = out.size() - cd_start;

    put_u32le(out, kEndSig);
    put_u16le(out, 0);
    put_u16le(out, 0);
    put_u16le(out, static_cast<std::uint16_t>(entries.size()));
    put_u16le(out, static_cast<std::uint16_t>(entries.size()));
    put_u32le(out, static_cast<std::uint32_t>(cd_size));
    put_u32le(out, static_cast<std::uint32_t>(cd_start));
    put_u16le(out, 0);
    return out;
}

}  // namespace msentry::zip
