#ifndef BCLEARER_CONTENT_ID_HPP
#define BCLEARER_CONTENT_ID_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "sha256.hpp"

namespace bclearer {

// 32-byte SHA-256 identity of some canonical byte string. Renders as 64
// lowercase hex characters everywhere it leaves the process.
class ContentId {
public:
    ContentId() : digest_{} {}
    explicit ContentId(const Sha256::Digest& d) : digest_(d) {}

    static ContentId of(std::string_view canonical_bytes) {
        return ContentId(Sha256::digest(canonical_bytes));
    }

    static std::optional<ContentId> from_hex(std::string_view hex) {
        if (hex.size() != 64) return std::nullopt;
        Sha256::Digest d;
        for (int i = 0; i < 32; ++i) {
            int hi = hex_nibble(hex[2 * i]);
            int lo = hex_nibble(hex[2 * i + 1]);
            if (hi < 0 || lo < 0) return std::nullopt;
            d[i] = static_cast<unsigned char>((hi << 4) | lo);
        }
        return ContentId(d);
    }

    // from_hex that raises EncodingError instead of returning nullopt.
    static ContentId parse_hex(std::string_view hex) {
        auto id = from_hex(hex);
        if (!id) raise(ErrorCode::EncodingError, "malformed content id: " + std::string(hex));
        return *id;
    }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(64, '0');
        for (int i = 0; i < 32; ++i) {
            out[2 * i] = digits[digest_[i] >> 4];
            out[2 * i + 1] = digits[digest_[i] & 0xf];
        }
        return out;
    }

    std::string short_hex() const { return hex().substr(0, 8); }

    const Sha256::Digest& bytes() const { return digest_; }

    auto operator<=>(const ContentId&) const = default;

private:
    static int hex_nibble(char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    }

    Sha256::Digest digest_;
};

struct ContentIdHash {
    std::size_t operator()(const ContentId& id) const noexcept {
        std::size_t v;
        static_assert(sizeof v <= 32);
        std::memcpy(&v, id.bytes().data(), sizeof v);
        return v;
    }
};

}  // namespace bclearer

#endif
