#pragma once

#include "ctxauth/authz/engine.hpp"

#include <map>

namespace ctxauth::patterns {

using authz::AuthMode;
using authz::AuthSession;
using authz::SessionId;
using authz::Target;
using authz::Transition;

enum class DenialReason { UnknownSubject, BadCredential, NotAuthorized };
std::string_view to_string(DenialReason reason) noexcept;

class PatternError : public std::runtime_error {
public:
    enum class Code { UnknownChannel, UnknownService, UnknownRequest, Duplicate, NotSubscribed, WrongChannelKind };

    PatternError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

struct Admission {
    std::optional<SessionId> session;  // set when granted
    std::optional<DenialReason> denial;
    std::vector<Transition> transitions;

    bool granted() const { return session.has_value(); }
};

// All authorization sessions of one producer, shared by the interaction
// patterns it serves. Every session runs in the same mode.
class SessionTable {
public:
    SessionTable(const authz::AuthzEngine& engine, AuthMode mode, Ms lease_duration);

    AuthMode mode() const noexcept { return mode_; }
    Ms lease_duration() const noexcept { return lease_; }
    const authz::AuthzEngine& engine() const noexcept { return engine_; }

    // Authenticate then authorize a new session. Denied sessions are
    // discarded; the transitions they went through are still reported.
    Admission admit(const SubjectId& subject, const Target& target, std::string_view credential,
                    const context::RegistryView& view);

    bool contains(SessionId id) const { return sessions_.contains(id); }
    AuthSession& at(SessionId id);
    const AuthSession& at(SessionId id) const;
    // Log off and drop the session.
    std::optional<Transition> close(SessionId id, Ms now);
    // Drop a session that has already left Authorized, without a transition.
    void discard(SessionId id) { sessions_.erase(id); }

    // Dynamic re-evaluation of every live session, in session order.
    std::vector<Transition> on_context_event(const context::RegistryView& view);
    std::vector<Transition> on_lease_tick(Ms now);

    // Whether the session's context is valid right now, independent of mode.
    bool context_valid(SessionId id, const context::RegistryView& view) const;

    const std::map<SessionId, AuthSession>& sessions() const noexcept { return sessions_; }

private:
    const authz::AuthzEngine& engine_;
    AuthMode mode_;
    Ms lease_;
    SessionId next_id_ = 1;
    std::map<SessionId, AuthSession> sessions_;
};

} // namespace ctxauth::patterns
