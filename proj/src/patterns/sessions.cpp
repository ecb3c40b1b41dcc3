#include "ctxauth/patterns/sessions.hpp"

namespace ctxauth::patterns {

std::string_view to_string(DenialReason reason) noexcept {
    switch (reason) {
    case DenialReason::UnknownSubject: return "unknown-subject";
    case DenialReason::BadCredential: return "bad-credential";
    case DenialReason::NotAuthorized: return "not-authorized";
    }
    return "?";
}

SessionTable::SessionTable(const authz::AuthzEngine& engine, AuthMode mode, Ms lease_duration)
    : engine_(engine), mode_(mode), lease_(lease_duration) {
    if (mode_ == AuthMode::QuasiStatic && lease_ <= 0) throw std::invalid_argument("quasi-static mode needs a lease");
}

Admission SessionTable::admit(const SubjectId& subject, const Target& target, std::string_view credential,
                              const context::RegistryView& view) {
    Admission out;
    if (!engine_.has_subject(subject)) {
        out.denial = DenialReason::UnknownSubject;
        return out;
    }
    const SessionId id = next_id_++;
    AuthSession session(id, subject, target, mode_, mode_ == AuthMode::QuasiStatic ? lease_ : 0);
    if (engine_.authenticate(session, credential) != authz::AuthState::Authenticated) {
        out.denial = DenialReason::BadCredential;
        return out;
    }
    out.transitions.push_back(Transition{id, subject, target, authz::AuthState::Unauthenticated,
                                         authz::AuthState::Authenticated, view.now,
                                         authz::TransitionCause::Authentication});
    out.transitions.push_back(engine_.authorize(session, view));
    if (session.state() != authz::AuthState::Authorized) {
        out.denial = DenialReason::NotAuthorized;
        return out;
    }
    out.session = id;
    sessions_.emplace(id, std::move(session));
    return out;
}

AuthSession& SessionTable::at(SessionId id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw std::out_of_range("unknown session " + std::to_string(id));
    return it->second;
}

const AuthSession& SessionTable::at(SessionId id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw std::out_of_range("unknown session " + std::to_string(id));
    return it->second;
}

std::optional<Transition> SessionTable::close(SessionId id, Ms now) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    auto t = engine_.logoff(it->second, now);
    sessions_.erase(it);
    return t;
}

std::vector<Transition> SessionTable::on_context_event(const context::RegistryView& view) {
    std::vector<Transition> out;
    for (auto& [id, s] : sessions_) {
        if (auto t = engine_.on_context_event(s, view)) out.push_back(*t);
    }
    return out;
}

std::vector<Transition> SessionTable::on_lease_tick(Ms now) {
    std::vector<Transition> out;
    for (auto& [id, s] : sessions_) {
        if (auto t = engine_.on_lease_tick(s, now)) out.push_back(*t);
    }
    return out;
}

bool SessionTable::context_valid(SessionId id, const context::RegistryView& view) const {
    const auto& s = at(id);
    return engine_.evaluate_authorization(s.subject(), s.target(), view).state == authz::AuthState::Authorized;
}

} // namespace ctxauth::patterns
