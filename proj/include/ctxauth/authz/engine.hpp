#pragma once

#include "ctxauth/authz/session.hpp"
#include "ctxauth/context/registry.hpp"

#include <string_view>

namespace ctxauth::authz {

class AuthError : public std::runtime_error {
public:
    enum class Code { UnknownSubject, DuplicateSubject, DuplicateCondition, InvalidCondition };

    AuthError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

struct RenewResult {
    bool granted = false;
    std::optional<Transition> transition;
};

// Rule engine and state-machine driver. Holds the registered credentials and
// conditions; observer state is passed in as a RegistryView on every call.
//
// A condition holds when its prerequisite (every referenced observer present,
// fresh and authenticated) holds and all its phi predicates are true. A
// subject is authorized for a target when at least one condition scoped to
// that (subject, target) holds. No scoped condition means no access.
class AuthzEngine {
public:
    void register_subject(const SubjectId& subject, std::string credential);
    bool has_subject(const SubjectId& subject) const { return credentials_.contains(subject); }
    // False for unknown subjects.
    bool check_credential(const SubjectId& subject, std::string_view credential) const;

    // Phi references must resolve in `registry`.
    void add_condition(Condition condition, const context::ObserverRegistry& registry);
    const std::vector<Condition>& conditions() const noexcept { return conditions_; }
    std::vector<const Condition*> scoped(const SubjectId& subject, const Target& target) const;

    bool evaluate_pi(const Condition& condition, const context::RegistryView& view) const;

    // Conjunction of the phi values. Throws ContractViolation when a value
    // for a referenced phi is absent, which is how a false prerequisite
    // presents itself to this function.
    bool evaluate_gamma(const Condition& condition, const std::map<PhiId, bool>& phi_values) const;

    ConditionVerdict evaluate_condition(const Condition& condition, const context::RegistryView& view) const;
    AuthorizationResult evaluate_authorization(const SubjectId& subject, const Target& target,
                                               const context::RegistryView& view) const;

    // Unauthenticated -> Authenticated on a matching credential. Throws
    // AuthError(UnknownSubject) for unregistered subjects and
    // ContractViolation when the session is not Unauthenticated.
    AuthState authenticate(AuthSession& session, std::string_view credential) const;

    // Initial decision for an Authenticated session. In QuasiStatic mode a
    // grant starts a lease of the session's duration.
    Transition authorize(AuthSession& session, const context::RegistryView& view) const;

    // Dynamic mode only; other modes ignore context events.
    std::optional<Transition> on_context_event(AuthSession& session, const context::RegistryView& view) const;

    // QuasiStatic mode only: the lease closes at expiry (now == expiry is expired).
    std::optional<Transition> on_lease_tick(AuthSession& session, Ms now) const;

    // QuasiStatic mode only. Re-runs the rules; a grant moves the expiry to
    // max(now, expiry) + lease duration.
    RenewResult renew(AuthSession& session, const context::RegistryView& view) const;

    std::optional<Transition> logoff(AuthSession& session, Ms now) const;

private:
    std::map<SubjectId, std::string> credentials_;
    std::vector<Condition> conditions_;
};

} // namespace ctxauth::authz
