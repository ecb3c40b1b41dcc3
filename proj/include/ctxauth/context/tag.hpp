#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctxauth::context {

using Bytes = std::vector<std::uint8_t>;
using SipKey = std::array<std::uint8_t, 16>;

Bytes to_bytes(std::string_view text);
std::string to_hex(std::span<const std::uint8_t> bytes);

// SipHash-2-4 (Aumasson & Bernstein), 64-bit output.
std::uint64_t siphash24(const SipKey& key, std::span<const std::uint8_t> message);

// Stretches an arbitrary-length secret into a SipHash key.
SipKey derive_key(std::span<const std::uint8_t> secret);

// Keyed tag function used for observer authenticity. Implementations must be
// deterministic; swap in a real MAC by providing another implementation.
class TagFunction {
public:
    virtual ~TagFunction() = default;
    virtual std::string tag(std::span<const std::uint8_t> secret, std::string_view message) const = 0;
};

// Lower-case hex of the little-endian SipHash-2-4 output under derive_key(secret).
class SipHashTag final : public TagFunction {
public:
    std::string tag(std::span<const std::uint8_t> secret, std::string_view message) const override;
};

std::shared_ptr<const TagFunction> default_tag_function();

} // namespace ctxauth::context
