#pragma once

#include "ctxauth/context/tag.hpp"
#include "ctxauth/context/value.hpp"

namespace ctxauth::context {

struct ObserverInfo {
    ObserverId observer;
    Value value;
    Ms timestamp = 0;
    std::string auth_tag;
};

// Secret shared between an observer and the trusted party co-signing its
// readings. An observer without an anchor never passes authenticity.
struct TrustAnchor {
    ObserverId observer;
    Bytes shared_secret;
};

std::string compute_auth_tag(const ObserverId& observer, const Value& value, Ms timestamp,
                             std::span<const std::uint8_t> secret,
                             const TagFunction& tags = *default_tag_function());

// Convenience: build an info item tagged under `anchor`.
ObserverInfo make_signed_info(const TrustAnchor& anchor, Value value, Ms timestamp,
                              const TagFunction& tags = *default_tag_function());

bool verify_authenticity(const ObserverInfo& info, const TrustAnchor& anchor,
                         const TagFunction& tags = *default_tag_function());

} // namespace ctxauth::context
