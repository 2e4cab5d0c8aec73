#include <doctest.h>

#include <bclearer/content_id.hpp>
#include <bclearer/graph.hpp>
#include <bclearer/sha256.hpp>

#include <string>

using namespace bclearer;

// Expected digests are frozen from an independent SHA-256 oracle
// (FIPS 180-4 vectors, cross-checked with Python hashlib).
TEST_CASE("sha256 standard vectors") {
    CHECK(ContentId::of("").hex() ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(ContentId::of("abc").hex() ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(ContentId::of("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq").hex() ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    CHECK(ContentId::of(std::string(100000, 'a')).hex() ==
          "6d1cf22d7cc09b085dfc25ee1a1f3ae0265804c607bc2074ad253bcc82fd81ee");
}

TEST_CASE("sha256 incremental equals one-shot") {
    Sha256 h;
    std::string payload(300, 'x');
    for (std::size_t i = 0; i < payload.size(); i += 7)
        h.update(payload.substr(i, 7));
    CHECK(ContentId(h.finish()) == ContentId::of(payload));
}

TEST_CASE("content_id determinism and sensitivity") {
    CHECK(ContentId::of("abc") == ContentId::of("abc"));
    // One-byte difference, both digests from the oracle.
    CHECK(ContentId::of("abd").hex() ==
          "a52d159f262b2c6ddb724a61840befc36eb30c88877a4030b65cbe86298449c9");
    CHECK(ContentId::of("abc") != ContentId::of("abd"));
}

TEST_CASE("hex rendering is 64 lowercase chars and round-trips") {
    ContentId id = ContentId::of("roundtrip");
    std::string hex = id.hex();
    CHECK(hex.size() == 64);
    for (char c : hex) CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
    CHECK(ContentId::from_hex(hex) == id);
    CHECK_FALSE(ContentId::from_hex("xyz"));
    CHECK_FALSE(ContentId::from_hex(hex.substr(1)));
    CHECK_THROWS_AS((void)ContentId::parse_hex("zz"), Error);
}

TEST_CASE("ordering is byte-lexicographic") {
    ContentId a = ContentId::of("a");
    ContentId b = ContentId::of("b");
    CHECK(((a < b) || (b < a)));
    CHECK_FALSE(a < a);
}
