#pragma once

#include "ctxauth/core/types.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ctxauth::authz {

enum class AuthMode { Static, QuasiStatic, Dynamic };
enum class AuthState { Unauthenticated, Authenticated, Authorized, Unauthorized };

std::string_view to_string(AuthMode mode) noexcept;
std::string_view to_string(AuthState state) noexcept;
// Accepts "static", "quasi", "quasi-static" and "dynamic".
std::optional<AuthMode> parse_mode(std::string_view text) noexcept;
std::optional<AuthState> parse_state(std::string_view text) noexcept;

// Operation on an object, e.g. subscribe on channel "news".
class Target {
public:
    Target() = default;
    Target(std::string operation, std::string object);

    const std::string& operation() const noexcept { return operation_; }
    const std::string& object() const noexcept { return object_; }
    std::string str() const { return operation_ + ":" + object_; }

    auto operator<=>(const Target&) const = default;

private:
    std::string operation_;
    std::string object_;
};

struct SubjectScope {
    bool any = false;
    std::set<SubjectId> subjects;

    static SubjectScope wildcard() { return {true, {}}; }
    static SubjectScope of(std::set<SubjectId> subjects) { return {false, std::move(subjects)}; }

    bool contains(const SubjectId& s) const { return any || subjects.contains(s); }
    bool operator==(const SubjectScope&) const = default;
};

// Alternative authorization rule <context, operation, object>: the context
// part is the conjunction of the referenced phi predicates.
struct Condition {
    ConditionId id;
    std::vector<PhiId> phi_refs;
    Target target;
    SubjectScope scope;

    bool operator==(const Condition&) const = default;
};

enum class PhiContribution { Missing, Unauthenticated, False, True };
std::string_view to_string(PhiContribution c) noexcept;

struct ConditionVerdict {
    ConditionId condition_id;
    bool pi_holds = false;
    std::optional<bool> gamma_holds;  // empty when pi_holds is false
    std::map<PhiId, PhiContribution> contributing;

    bool satisfied() const { return pi_holds && gamma_holds.value_or(false); }
};

struct AuthorizationResult {
    AuthState state = AuthState::Unauthorized;
    std::vector<ConditionVerdict> verdicts;

    std::set<ConditionId> satisfied() const;
};

using SessionId = std::uint64_t;

enum class TransitionCause {
    Authentication,
    Grant,
    Deny,
    ContextRevoked,
    ContextRegranted,
    LeaseExpired,
    Renewed,
    RenewalDenied,
    Logoff,
};
std::string_view to_string(TransitionCause cause) noexcept;

struct Transition {
    SessionId session = 0;
    SubjectId subject;
    Target target;
    AuthState from = AuthState::Unauthenticated;
    AuthState to = AuthState::Unauthenticated;
    Ms at = 0;
    TransitionCause cause = TransitionCause::Grant;

    bool is_revocation() const { return from == AuthState::Authorized && to != AuthState::Authorized; }
    bool is_grant() const { return to == AuthState::Authorized && from != AuthState::Authorized; }
};

} // namespace ctxauth::authz
