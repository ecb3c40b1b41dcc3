#include "ctxauth/context/tag.hpp"

namespace ctxauth::context {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int b) {
    return (x << b) | (x >> (64 - b));
}

std::uint64_t load_le64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

struct SipState {
    std::uint64_t v0, v1, v2, v3;

    void round() {
        v0 += v1; v1 = rotl(v1, 13); v1 ^= v0; v0 = rotl(v0, 32);
        v2 += v3; v3 = rotl(v3, 16); v3 ^= v2;
        v0 += v3; v3 = rotl(v3, 21); v3 ^= v0;
        v2 += v1; v1 = rotl(v1, 17); v1 ^= v2; v2 = rotl(v2, 32);
    }
};

} // namespace

Bytes to_bytes(std::string_view text) {
    return Bytes(text.begin(), text.end());
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

std::uint64_t siphash24(const SipKey& key, std::span<const std::uint8_t> message) {
    const std::uint64_t k0 = load_le64(key.data());
    const std::uint64_t k1 = load_le64(key.data() + 8);
    SipState s{0x736f6d6570736575ULL ^ k0, 0x646f72616e646f6dULL ^ k1, 0x6c7967656e657261ULL ^ k0,
               0x7465646279746573ULL ^ k1};

    const std::size_t len = message.size();
    const std::size_t full = len - (len % 8);
    for (std::size_t i = 0; i < full; i += 8) {
        const std::uint64_t m = load_le64(message.data() + i);
        s.v3 ^= m;
        s.round();
        s.round();
        s.v0 ^= m;
    }

    std::uint64_t last = static_cast<std::uint64_t>(len & 0xFF) << 56;
    for (std::size_t i = full; i < len; ++i) {
        last |= static_cast<std::uint64_t>(message[i]) << (8 * (i - full));
    }
    s.v3 ^= last;
    s.round();
    s.round();
    s.v0 ^= last;

    s.v2 ^= 0xFF;
    for (int i = 0; i < 4; ++i) s.round();
    return s.v0 ^ s.v1 ^ s.v2 ^ s.v3;
}

SipKey derive_key(std::span<const std::uint8_t> secret) {
    SipKey zero{};
    SipKey out{};
    for (std::uint8_t half = 0; half < 2; ++half) {
        Bytes msg;
        msg.reserve(secret.size() + 1);
        msg.push_back(half);
        msg.insert(msg.end(), secret.begin(), secret.end());
        std::uint64_t h = siphash24(zero, msg);
        for (int i = 0; i < 8; ++i) out[half * 8 + i] = static_cast<std::uint8_t>(h >> (8 * i));
    }
    return out;
}

std::string SipHashTag::tag(std::span<const std::uint8_t> secret, std::string_view message) const {
    const std::uint64_t h = siphash24(derive_key(secret), to_bytes(message));
    std::array<std::uint8_t, 8> le{};
    for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>(h >> (8 * i));
    return to_hex(le);
}

std::shared_ptr<const TagFunction> default_tag_function() {
    static const auto instance = std::make_shared<const SipHashTag>();
    return instance;
}

} // namespace ctxauth::context
