#ifndef BCLEARER_UNICODE_HPP
#define BCLEARER_UNICODE_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace bclearer {
namespace unicode {

#include "unicode_data.inc"

inline bool is_valid_utf8(std::string_view s) {
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        std::uint32_t cp;
        if (c < 0x80) { len = 1; cp = c; }
        else if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
        else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
        else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
        else return false;
        if (i + len > n) return false;
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Reject overlong forms, surrogates, and out-of-range values.
        if (len == 2 && cp < 0x80) return false;
        if (len == 3 && cp < 0x800) return false;
        if (len == 4 && cp < 0x10000) return false;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

inline std::vector<char32_t> decode_utf8(std::string_view s) {
    if (!is_valid_utf8(s)) raise(ErrorCode::EncodingError, "invalid UTF-8");
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        char32_t cp;
        if (c < 0x80) { len = 1; cp = c; }
        else if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
        else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
        else { len = 4; cp = c & 0x07; }
        for (std::size_t k = 1; k < len; ++k)
            cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode_utf8(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

// Unicode White_Space property (PropList.txt).
inline bool is_whitespace(char32_t cp) {
    switch (cp) {
        case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
        case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
        case 0x2000: case 0x2001: case 0x2002: case 0x2003: case 0x2004:
        case 0x2005: case 0x2006: case 0x2007: case 0x2008: case 0x2009:
        case 0x200A: case 0x2028: case 0x2029: case 0x202F: case 0x205F:
        case 0x3000:
            return true;
        default:
            return false;
    }
}

inline std::uint8_t combining_class(char32_t cp) {
    auto it = std::lower_bound(std::begin(kCombiningClass), std::end(kCombiningClass), cp,
                               [](const CccEntry& e, char32_t v) { return e.cp < v; });
    if (it != std::end(kCombiningClass) && it->cp == cp) return it->ccc;
    return 0;
}

namespace hangul {
constexpr char32_t kSBase = 0xAC00, kLBase = 0x1100, kVBase = 0x1161, kTBase = 0x11A7;
constexpr int kLCount = 19, kVCount = 21, kTCount = 28;
constexpr int kNCount = kVCount * kTCount;
constexpr int kSCount = kLCount * kNCount;
inline bool is_syllable(char32_t cp) { return cp >= kSBase && cp < kSBase + kSCount; }
}  // namespace hangul

inline void canonical_decompose(char32_t cp, std::vector<char32_t>& out) {
    if (hangul::is_syllable(cp)) {
        int s = static_cast<int>(cp - hangul::kSBase);
        out.push_back(hangul::kLBase + s / hangul::kNCount);
        out.push_back(hangul::kVBase + (s % hangul::kNCount) / hangul::kTCount);
        int t = s % hangul::kTCount;
        if (t != 0) out.push_back(hangul::kTBase + t);
        return;
    }
    auto it = std::lower_bound(std::begin(kDecompIndex), std::end(kDecompIndex), cp,
                               [](const DecompEntry& e, char32_t v) { return e.cp < v; });
    if (it != std::end(kDecompIndex) && it->cp == cp) {
        for (std::uint32_t k = 0; k < it->len; ++k)
            out.push_back(kDecompFlat[it->offset + k]);
        return;
    }
    out.push_back(cp);
}

inline char32_t compose_pair(char32_t a, char32_t b) {
    if (a >= hangul::kLBase && a < hangul::kLBase + hangul::kLCount &&
        b >= hangul::kVBase && b < hangul::kVBase + hangul::kVCount) {
        return hangul::kSBase +
               (a - hangul::kLBase) * hangul::kNCount +
               (b - hangul::kVBase) * hangul::kTCount;
    }
    if (hangul::is_syllable(a) && (a - hangul::kSBase) % hangul::kTCount == 0 &&
        b > hangul::kTBase && b < hangul::kTBase + hangul::kTCount) {
        return a + (b - hangul::kTBase);
    }
    auto it = std::lower_bound(
        std::begin(kComposition), std::end(kComposition), std::pair<char32_t, char32_t>(a, b),
        [](const CompEntry& e, const std::pair<char32_t, char32_t>& v) {
            return e.first != v.first ? e.first < v.first : e.second < v.second;
        });
    if (it != std::end(kComposition) && it->first == a && it->second == b)
        return it->composed;
    return 0;
}

// NFC per UAX #15: full canonical decomposition, canonical ordering, then
// canonical composition.
inline std::string to_nfc(std::string_view s) {
    std::vector<char32_t> in = decode_utf8(s);

    std::vector<char32_t> nfd;
    nfd.reserve(in.size());
    for (char32_t cp : in) canonical_decompose(cp, nfd);

    // Canonical ordering: stable-sort each run of non-starters by ccc.
    std::size_t i = 0;
    while (i < nfd.size()) {
        if (combining_class(nfd[i]) == 0) { ++i; continue; }
        std::size_t j = i;
        while (j < nfd.size() && combining_class(nfd[j]) != 0) ++j;
        std::stable_sort(nfd.begin() + i, nfd.begin() + j,
                         [](char32_t a, char32_t b) {
                             return combining_class(a) < combining_class(b);
                         });
        i = j;
    }

    // Composition pass.
    std::vector<char32_t> out;
    out.reserve(nfd.size());
    std::ptrdiff_t last_starter = -1;
    int last_cc = 0;
    for (char32_t cp : nfd) {
        int cc = combining_class(cp);
        if (last_starter >= 0 && (last_cc < cc || last_cc == 0)) {
            if (char32_t composed = compose_pair(out[last_starter], cp)) {
                out[last_starter] = composed;
                continue;
            }
        }
        if (cc == 0) {
            last_starter = static_cast<std::ptrdiff_t>(out.size());
            last_cc = 0;
        } else {
            last_cc = cc;
        }
        out.push_back(cp);
    }
    return encode_utf8(out);
}

inline std::string trim_whitespace(std::string_view s) {
    std::vector<char32_t> cps = decode_utf8(s);
    std::size_t begin = 0, end = cps.size();
    while (begin < end && is_whitespace(cps[begin])) ++begin;
    while (end > begin && is_whitespace(cps[end - 1])) --end;
    std::string out;
    for (std::size_t i = begin; i < end; ++i) append_utf8(out, cps[i]);
    return out;
}

}  // namespace unicode
}  // namespace bclearer

#endif
