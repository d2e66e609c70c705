#include <zlib.h>

#include "doctest.h"
#include "msentry/zip.hpp"

using namespace msentry;

namespace {

zip::Inventory inv_of(const Bytes& file) { return zip::read_inventory(file); }

// Hand-built archive with one raw-deflate entry, so the reader's inflate path
// is exercised against zlib's compressor.
Bytes deflate_archive(const std::string& name, const Bytes& content) {
    uLongf bound = compressBound(static_cast<uLong>(content.size()));
    Bytes compressed(bound + 16);
    z_stream strm{};
    REQUIRE(deflateInit2(&strm, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8,
                         Z_DEFAULT_STRATEGY) == Z_OK);
    strm.next_in = const_cast<Bytef*>(content.data());
    strm.avail_in = static_cast<uInt>(content.size());
    strm.next_out = compressed.data();
    strm.avail_out = static_cast<uInt>(compressed.size());
    REQUIRE(deflate(&strm, Z_FINISH) == Z_STREAM_END);
    compressed.resize(strm.total_out);
    deflateEnd(&strm);

    std::uint32_t crc = crc32_ieee(content);
    Bytes out;
    // local header
    put_u32le(out, 0x04034b50);
    put_u16le(out, 20);
    put_u16le(out, 0);
    put_u16le(out, 8);  // deflate
    put_u16le(out, 0);
    put_u16le(out, 0x21);
    put_u32le(out, crc);
    put_u32le(out, static_cast<std::uint32_t>(compressed.size()));
    put_u32le(out, static_cast<std::uint32_t>(content.size()));
    put_u16le(out, static_cast<std::uint16_t>(name.size()));
    put_u16le(out, 0);
    append(out, name);
    append(out, ByteSpan(compressed));
    std::uint64_t cd_start = out.size();
    // central directory
    put_u32le(out, 0x02014b50);
    put_u16le(out, 20);
    put_u16le(out, 20);
    put_u16le(out, 0);
    put_u16le(out, 8);
    put_u16le(out, 0);
    put_u16le(out, 0x21);
    put_u32le(out, crc);
    put_u32le(out, static_cast<std::uint32_t>(compressed.size()));
    put_u32le(out, static_cast<std::uint32_t>(content.size()));
    put_u16le(out, static_cast<std::uint16_t>(name.size()));
    put_u16le(out, 0);
    put_u16le(out, 0);
    put_u16le(out, 0);
    put_u16le(out, 0);
    put_u32le(out, 0);
    put_u32le(out, 0);  // local header offset
    append(out, name);
    std::uint64_t cd_size = out.size() - cd_start;
    // end record
    put_u32le(out, 0x06054b50);
    put_u16le(out, 0);
    put_u16le(out, 0);
    put_u16le(out, 1);
    put_u16le(out, 1);
    put_u32le(out, static_cast<std::uint32_t>(cd_size));
    put_u32le(out, static_cast<std::uint32_t>(cd_start));
    put_u16le(out, 0);
    return out;
}

}  // namespace

TEST_CASE("empty archive is the bare 22-byte end record") {
    Bytes archive = zip::write_stored({});
    CHECK(archive.size() == 22);
    CHECK(zip::is_empty_archive(archive));
}

TEST_CASE("stored writer round-trips through the reader") {
    std::vector<zip::EntrySpec> entries = {
        {"a.txt", to_bytes("x")},
        {"dir/b.bin", {0x00, 0xff, 0x10}},
        {"empty", {}},
    };
    Bytes archive = zip::write_stored(entries);
    zip::Inventory inv = inv_of(archive);
    REQUIRE(inv.entries.size() == 3);
    CHECK(inv.entries[0].name == "a.txt");
    CHECK(inv.entries[1].name == "dir/b.bin");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Bytes back = zip::read_entry(archive, inv.entries[i]);
        CHECK(back == entries[i].data);
    }
}

TEST_CASE("entry crc32 equals the standard polynomial result") {
    // independent oracle: zlib's crc32
    Bytes archive = zip::write_stored({{"a", to_bytes("x")}});
    zip::Inventory inv = inv_of(archive);
    uLong expected = ::crc32(0L, reinterpret_cast<const Bytef*>("x"), 1);
    CHECK(inv.entries[0].crc32 == static_cast<std::uint32_t>(expected));
}

TEST_CASE("duplicate entry names are rejected by the writer") {
    CHECK_THROWS_AS(zip::write_stored({{"a", {}}, {"a", {}}}), std::invalid_argument);
}

TEST_CASE("duplicate entry names are rejected by the reader") {
    Bytes archive = zip::write_stored({{"a", to_bytes("1")}, {"b", to_bytes("2")}});
    // rewrite the second central-directory name "b" -> "a"
    for (std::size_t i = archive.size(); i-- > 0;) {
        if (archive[i] == 'b') {
            archive[i] = 'a';
            break;
        }
    }
    CHECK_THROWS_AS(inv_of(archive), ZipError);
}

TEST_CASE("deflate entries inflate back to the original bytes") {
    Bytes content = to_bytes(std::string(3000, 'z') + "tail");
    Bytes archive = deflate_archive("z.txt", content);
    zip::Inventory inv = inv_of(archive);
    REQUIRE(inv.entries.size() == 1);
    CHECK(inv.entries[0].method == 8);
    CHECK(zip::read_entry(archive, inv.entries[0]) == content);
}

TEST_CASE("corrupt central directory reports a byte offset") {
    Bytes archive = zip::write_stored({{"a.txt", to_bytes("hello")}});
    // smash the central-directory signature
    std::size_t cd = archive.size() - 22 - (46 + 5);
    archive[cd] = 0x00;
    try {
        inv_of(archive);
        FAIL("expected ZipError");
    } catch (const ZipError& e) {
        CHECK(e.offset() == cd);
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("truncated archive without end record is rejected") {
    Bytes archive = zip::write_stored({{"a.txt", to_bytes("hello")}});
    archive.resize(archive.size() - 4);
    CHECK_THROWS_AS(inv_of(archive), ZipError);
}

TEST_CASE("entry-count mismatch between end-record fields is rejected") {
    Bytes archive = zip::write_stored({{"a", {}}});
    std::size_t eo = archive.size() - 22;
    archive[eo + 10] = 0xff;  // total says 255, per-disk still 1
    CHECK_THROWS_AS(inv_of(archive), ZipError);
}

TEST_CASE("zip64 size markers are refused") {
    Bytes archive = zip::write_stored({{"a", to_bytes("abc")}});
    std::size_t eo = archive.size() - 22;
    std::size_t cd = read_u32le(archive, eo + 16);
    for (int i = 0; i < 4; ++i) archive[cd + 24 + static_cast<std::size_t>(i)] = 0xff;
    CHECK_THROWS_AS(inv_of(archive), ZipError);
}

TEST_CASE("encrypted entries are refused") {
    Bytes archive = zip::write_stored({{"a", to_bytes("abc")}});
    std::size_t eo = archive.size() - 22;
    std::size_t cd = read_u32le(archive, eo + 16);
    archive[cd + 8] |= 0x01;  // encryption flag
    CHECK_THROWS_AS(inv_of(archive), ZipError);
}

TEST_CASE("stored entry data failing its crc is rejected on read") {
    Bytes archive = zip::write_stored({{"a.txt", to_bytes("hello")}});
    zip::Inventory inv = inv_of(archive);
    archive[30 + 5] ^= 0xff;  // first data byte after local header + name
    CHECK_THROWS_AS(zip::read_entry(archive, inv.entries[0]), ZipError);
}
