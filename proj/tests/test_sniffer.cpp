#include <random>

#include "doctest.h"
#include "msentry/corpus.hpp"
#include "msentry/sniffer.hpp"

using namespace msentry;

namespace {

FormatKind sniff_str(std::string_view s) { return sniff(as_bytes(s)); }

}  // namespace

TEST_CASE("published magic signatures") {
    Bytes h5 = {0x89, 'H', 'D', 'F', 0x0D, 0x0A, 0x1A, 0x0A, 0, 0};
    CHECK(sniff(h5).kind == Format::Hdf5);

    Bytes p4 = {0x80, 0x04, 'N', '.'};
    CHECK(sniff(p4) == FormatKind{Format::Pickle, 4});

    Bytes p2 = {0x80, 0x02, 'N', '.'};
    CHECK(sniff(p2) == FormatKind{Format::Pickle, 2});
}

TEST_CASE("empty and unrecognizable inputs map to Unknown") {
    CHECK(sniff({}).kind == Format::Unknown);
    CHECK(sniff_str("hello world").kind == Format::Unknown);
    CHECK(sniff_str("4").kind == Format::Unknown);  // bare JSON scalar is not a document
}

TEST_CASE("structured JSON documents are recognized") {
    CHECK(sniff_str("{}").kind == Format::JsonDocument);
    CHECK(sniff_str("  [1, 2, {\"a\": null}]").kind == Format::JsonDocument);
    CHECK(sniff_str("{broken").kind == Format::Unknown);
}

TEST_CASE("protocol-0 pickles are detected without a magic byte") {
    CHECK(sniff_str("(lp0\n.") == FormatKind{Format::Pickle, 0});
    CHECK(sniff_str("N.") == FormatKind{Format::Pickle, 0});
}

TEST_CASE("sniffing is deterministic and name-free by construction") {
    std::mt19937 rng(5);
    for (int i = 0; i < 200; ++i) {
        std::size_t len = rng() % 64;
        Bytes data(len);
        for (auto& b : data) b = static_cast<std::uint8_t>(rng());
        CHECK(sniff(data) == sniff(data));
    }
}

TEST_CASE("archive subtypes from the corpus generator") {
    auto kv1 = corpus::gen_artifact(corpus::CaseId::Kv1);
    CHECK(sniff(kv1.bytes).kind == Format::KerasV3Archive);

    auto sv1 = corpus::gen_artifact(corpus::CaseId::Sv1);
    CHECK(sniff(sv1.bytes).kind == Format::SkopsArchive);

    Bytes other = zip::write_stored({{"readme.txt", to_bytes("hi")}});
    CHECK(sniff(other).kind == Format::UnknownZip);

    Bytes empty_zip = zip::write_stored({});
    CHECK(sniff(empty_zip).kind == Format::UnknownZip);
}

TEST_CASE("both marker entries break the tie toward keras") {
    Bytes both = zip::write_stored({
        {"config.json", to_bytes("{\"class_name\": \"Functional\"}")},
        {"schema.json", to_bytes("{}")},
    });
    CHECK(sniff(both).kind == Format::KerasV3Archive);
}

TEST_CASE("marker entry must parse as a structured document") {
    Bytes bad = zip::write_stored({{"config.json", to_bytes("not json")}});
    CHECK(sniff(bad).kind == Format::UnknownZip);
    Bytes scalar = zip::write_stored({{"config.json", to_bytes("42")}});
    CHECK(sniff(scalar).kind == Format::UnknownZip);
}

TEST_CASE("pickle wearing a PK local-header magic is still a pickle") {
    // 'P' is PERSID and eats "K\x03\x04" as its line argument; the central
    // directory parse fails, so classification falls through to the decoder.
    Bytes s = to_bytes(std::string("PK\x03\x04\nN."));
    CHECK(sniff(s) == FormatKind{Format::Pickle, 0});
}

TEST_CASE("corrupt zip carries a structured issue in the detailed result") {
    Bytes s = to_bytes(std::string("PK\x03\x04") + std::string(64, '\0'));
    SniffDetail d = sniff_detailed(s);
    CHECK(d.format.kind == Format::Unknown);
    REQUIRE(d.zip_issue.has_value());
    CHECK(d.zip_issue->find("byte") != std::string::npos);
}

TEST_CASE("protobuf-like tag streams are labeled best-effort") {
    // field 1 length-delimited "hello", field 2 varint 42, field 3 fixed32
    Bytes pb = {0x0a, 0x05, 'h', 'e', 'l', 'l', 'o', 0x10, 0x2a, 0x1d, 1, 2, 3, 4};
    CHECK(sniff(pb).kind == Format::ProtobufLike);
    // truncated length prefix is not protobuf
    Bytes bad = {0x0a, 0x7f, 'x'};
    CHECK(sniff(bad).kind == Format::Unknown);
}

TEST_CASE("totality: sniff never throws on arbitrary bytes") {
    std::mt19937 rng(77);
    for (int i = 0; i < 3000; ++i) {
        std::size_t len = rng() % 256;
        Bytes data(len);
        for (auto& b : data) b = static_cast<std::uint8_t>(rng());
        CHECK_NOTHROW((void)sniff(data));
    }
    // seeded prefixes: zip/hdf5/pickle magics followed by junk
    const std::string prefixes[] = {"PK\x03\x04", "\x89HDF\r\n\x1a\n",
                                    std::string("\x80\x04", 2), "{", "(", "]"};
    for (const auto& p : prefixes) {
        for (int i = 0; i < 300; ++i) {
            Bytes data = to_bytes(p);
            std::size_t len = rng() % 64;
            for (std::size_t k = 0; k < len; ++k)
                data.push_back(static_cast<std::uint8_t>(rng()));
            CHECK_NOTHROW((void)sniff(data));
        }
    }
}

TEST_CASE("format names round-trip") {
    for (auto f : {FormatKind{Format::KerasV3Archive, 0}, FormatKind{Format::SkopsArchive, 0},
                   FormatKind{Format::UnknownZip, 0}, FormatKind{Format::Hdf5, 0},
                   FormatKind{Format::Pickle, 0}, FormatKind{Format::Pickle, 5},
                   FormatKind{Format::JsonDocument, 0}, FormatKind{Format::ProtobufLike, 0},
                   FormatKind{Format::Unknown, 0}}) {
        auto back = format_from_name(format_name(f));
        REQUIRE(back.has_value());
        CHECK(*back == f);
    }
    CHECK_FALSE(format_from_name("bogus").has_value());
}
