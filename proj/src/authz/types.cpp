#include "ctxauth/authz/types.hpp"

#include <stdexcept>

namespace ctxauth::authz {

std::string_view to_string(AuthMode mode) noexcept {
    switch (mode) {
    case AuthMode::Static: return "static";
    case AuthMode::QuasiStatic: return "quasi";
    case AuthMode::Dynamic: return "dynamic";
    }
    return "?";
}

std::string_view to_string(AuthState state) noexcept {
    switch (state) {
    case AuthState::Unauthenticated: return "Unauthenticated";
    case AuthState::Authenticated: return "Authenticated";
    case AuthState::Authorized: return "Authorized";
    case AuthState::Unauthorized: return "Unauthorized";
    }
    return "?";
}

std::optional<AuthMode> parse_mode(std::string_view text) noexcept {
    if (text == "static") return AuthMode::Static;
    if (text == "quasi" || text == "quasi-static") return AuthMode::QuasiStatic;
    if (text == "dynamic") return AuthMode::Dynamic;
    return std::nullopt;
}

std::optional<AuthState> parse_state(std::string_view text) noexcept {
    for (auto s : {AuthState::Unauthenticated, AuthState::Authenticated, AuthState::Authorized,
                   AuthState::Unauthorized}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::string_view to_string(PhiContribution c) noexcept {
    switch (c) {
    case PhiContribution::Missing: return "missing";
    case PhiContribution::Unauthenticated: return "unauthenticated";
    case PhiContribution::False: return "false";
    case PhiContribution::True: return "true";
    }
    return "?";
}

std::string_view to_string(TransitionCause cause) noexcept {
    switch (cause) {
    case TransitionCause::Authentication: return "authentication";
    case TransitionCause::Grant: return "grant";
    case TransitionCause::Deny: return "deny";
    case TransitionCause::ContextRevoked: return "context-revoked";
    case TransitionCause::ContextRegranted: return "context-regranted";
    case TransitionCause::LeaseExpired: return "lease-expired";
    case TransitionCause::Renewed: return "renewed";
    case TransitionCause::RenewalDenied: return "renewal-denied";
    case TransitionCause::Logoff: return "logoff";
    }
    return "?";
}

Target::Target(std::string operation, std::string object)
    : operation_(std::move(operation)), object_(std::move(object)) {
    if (operation_.empty() || object_.empty()) throw std::invalid_argument("target operation and object must be non-empty");
}

std::set<ConditionId> AuthorizationResult::satisfied() const {
    std::set<ConditionId> out;
    for (const auto& v : verdicts) {
        if (v.satisfied()) out.insert(v.condition_id);
    }
    return out;
}

} // namespace ctxauth::authz
