#include "ctxauth/context/observer.hpp"

namespace ctxauth::context {

std::string compute_auth_tag(const ObserverId& observer, const Value& value, Ms timestamp,
                             std::span<const std::uint8_t> secret, const TagFunction& tags) {
    return tags.tag(secret, canonical_encoding(observer, value, timestamp));
}

ObserverInfo make_signed_info(const TrustAnchor& anchor, Value value, Ms timestamp, const TagFunction& tags) {
    ObserverInfo info{anchor.observer, std::move(value), timestamp, {}};
    info.auth_tag = compute_auth_tag(info.observer, info.value, info.timestamp, anchor.shared_secret, tags);
    return info;
}

bool verify_authenticity(const ObserverInfo& info, const TrustAnchor& anchor, const TagFunction& tags) {
    if (info.observer != anchor.observer) return false;
    return info.auth_tag == compute_auth_tag(info.observer, info.value, info.timestamp, anchor.shared_secret, tags);
}

} // namespace ctxauth::context
