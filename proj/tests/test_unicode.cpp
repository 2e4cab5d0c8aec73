#include <doctest.h>

#include <bclearer/unicode.hpp>

#include <string>
#include <vector>

using namespace bclearer;

namespace {

std::string cps(std::initializer_list<char32_t> list) {
    std::string out;
    for (char32_t cp : list) unicode::append_utf8(out, cp);
    return out;
}

}  // namespace

TEST_CASE("utf8 validation") {
    CHECK(unicode::is_valid_utf8(""));
    CHECK(unicode::is_valid_utf8("plain ascii"));
    CHECK(unicode::is_valid_utf8("caf\xC3\xA9"));
    CHECK_FALSE(unicode::is_valid_utf8("\xFF"));
    CHECK_FALSE(unicode::is_valid_utf8("\xC3"));          // truncated
    CHECK_FALSE(unicode::is_valid_utf8("\xC0\xAF"));      // overlong
    CHECK_FALSE(unicode::is_valid_utf8("\xED\xA0\x80"));  // surrogate
    CHECK_THROWS_AS((void)unicode::decode_utf8("\xFF"), Error);
}

TEST_CASE("utf8 encode/decode round-trip") {
    std::vector<char32_t> sample{0x41, 0xE9, 0x2028, 0x1F600, 0xAC01};
    std::string bytes = unicode::encode_utf8(sample);
    CHECK(unicode::decode_utf8(bytes) == sample);
}

// Expected sequences frozen from an independent NFC normalizer
// (Python unicodedata, Unicode 13.0).
TEST_CASE("nfc normalization") {
    CHECK(unicode::to_nfc(cps({0x0043, 0x0061, 0x0066, 0x0065, 0x0301})) ==
          cps({0x0043, 0x0061, 0x0066, 0x00E9}));  // Cafe + combining acute
    CHECK(unicode::to_nfc(cps({0x0065, 0x0301})) == cps({0x00E9}));
    // Canonical reordering: dot-above (ccc 230) after dot-below (ccc 220).
    CHECK(unicode::to_nfc(cps({0x0071, 0x0307, 0x0323})) == cps({0x0071, 0x0323, 0x0307}));
    CHECK(unicode::to_nfc(cps({0x0071, 0x0323, 0x0307})) == cps({0x0071, 0x0323, 0x0307}));
    // Singleton decomposition: angstrom sign composes to A-ring.
    CHECK(unicode::to_nfc(cps({0x212B})) == cps({0x00C5}));
    CHECK(unicode::to_nfc(cps({0x0041, 0x030A})) == cps({0x00C5}));
    // d-with-dot-above + dot-below recomposes as d-with-dot-below + dot-above.
    CHECK(unicode::to_nfc(cps({0x1E0B, 0x0323})) == cps({0x1E0D, 0x0307}));
    // Composition exclusions stay decomposed.
    CHECK(unicode::to_nfc(cps({0x0958})) == cps({0x0915, 0x093C}));
    CHECK(unicode::to_nfc(cps({0x0915, 0x093C})) == cps({0x0915, 0x093C}));
    // Hangul algorithmic composition.
    CHECK(unicode::to_nfc(cps({0x1100, 0x1161, 0x11A8})) == cps({0xAC01}));
    CHECK(unicode::to_nfc(cps({0xAC01})) == cps({0xAC01}));
    CHECK(unicode::to_nfc("plain") == "plain");
}

TEST_CASE("nfc is idempotent over a code point pool") {
    std::vector<std::string> pool = {
        cps({0x0065, 0x0301}),
        cps({0x0071, 0x0307, 0x0323}),
        cps({0x212B, 0x1E0B, 0x0323}),
        cps({0x1100, 0x1161, 0x11A8, 0x0041, 0x030A}),
        cps({0x0958, 0x0915, 0x093C}),
        "mixed ascii",
    };
    for (const std::string& s : pool) {
        std::string once = unicode::to_nfc(s);
        CHECK(unicode::to_nfc(once) == once);
    }
}

namespace {
#include "nfc_cases.inc"
}

TEST_CASE("nfc agrees with the reference corpus") {
    // 160 frozen input/expected pairs spanning diacritic stacking, canonical
    // reordering, singletons, composition exclusions and Hangul.
    for (const auto& [input, expected] : kNfcCases) {
        std::vector<char32_t> in(input.begin(), input.end());
        std::vector<char32_t> want(expected.begin(), expected.end());
        CHECK(unicode::to_nfc(unicode::encode_utf8(in)) == unicode::encode_utf8(want));
    }
}

TEST_CASE("unicode whitespace trim") {
    CHECK(unicode::trim_whitespace("  Sales  ") == "Sales");
    CHECK(unicode::trim_whitespace("\t\r\nSales\n") == "Sales");
    CHECK(unicode::trim_whitespace(cps({0x00A0, 0x53, 0x2009})) == "S");  // nbsp, thin space
    CHECK(unicode::trim_whitespace("inner  space") == "inner  space");
    CHECK(unicode::trim_whitespace("") == "");
    CHECK(unicode::trim_whitespace(cps({0x3000, 0x3000})) == "");
}
