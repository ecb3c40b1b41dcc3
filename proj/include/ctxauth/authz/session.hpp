#pragma once

#include "ctxauth/authz/types.hpp"

namespace ctxauth::authz {

// Per-subject authorization state machine instance. Transitions happen only
// through AuthzEngine.
//
//  Static:      Unauthenticated -> Authenticated -> Authorized, left only by logoff.
//  QuasiStatic: as Static, plus Authorized -> Unauthorized when the lease
//               expires or a renewal is refused; a renewal re-runs the rules.
//  Dynamic:     Authorized <-> Unauthorized on every context event.
class AuthSession {
public:
    AuthSession(SessionId id, SubjectId subject, Target target, AuthMode mode, Ms lease_duration = 0);

    SessionId id() const noexcept { return id_; }
    const SubjectId& subject() const noexcept { return subject_; }
    const Target& target() const noexcept { return target_; }
    AuthMode mode() const noexcept { return mode_; }
    AuthState state() const noexcept { return state_; }
    Ms lease_duration() const noexcept { return lease_duration_; }
    std::optional<Ms> lease_expiry() const noexcept { return lease_expiry_; }
    const std::set<ConditionId>& granted_by() const noexcept { return granted_by_; }

    // True when the session may receive protected traffic at `now`. In
    // QuasiStatic mode this also requires now < lease expiry.
    bool authorized_at(Ms now) const noexcept;

private:
    friend class AuthzEngine;

    SessionId id_;
    SubjectId subject_;
    Target target_;
    AuthMode mode_;
    AuthState state_ = AuthState::Unauthenticated;
    Ms lease_duration_ = 0;
    std::optional<Ms> lease_expiry_;
    std::set<ConditionId> granted_by_;
};

} // namespace ctxauth::authz
