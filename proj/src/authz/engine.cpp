#include "ctxauth/authz/engine.hpp"

#include <algorithm>

namespace ctxauth::authz {

using context::ObserverStatus;
using context::RegistryView;

AuthSession::AuthSession(SessionId id, SubjectId subject, Target target, AuthMode mode, Ms lease_duration)
    : id_(id), subject_(std::move(subject)), target_(std::move(target)), mode_(mode), lease_duration_(lease_duration) {
    if (mode_ == AuthMode::QuasiStatic && lease_duration_ <= 0) {
        throw std::invalid_argument("quasi-static sessions need a positive lease duration");
    }
}

bool AuthSession::authorized_at(Ms now) const noexcept {
    if (state_ != AuthState::Authorized) return false;
    if (mode_ == AuthMode::QuasiStatic) return lease_expiry_ && now < *lease_expiry_;
    return true;
}

void AuthzEngine::register_subject(const SubjectId& subject, std::string credential) {
    if (!credentials_.emplace(subject, std::move(credential)).second) {
        throw AuthError(AuthError::Code::DuplicateSubject, "subject '" + subject.str() + "' already registered");
    }
}

bool AuthzEngine::check_credential(const SubjectId& subject, std::string_view credential) const {
    auto it = credentials_.find(subject);
    return it != credentials_.end() && it->second == credential;
}

void AuthzEngine::add_condition(Condition c, const context::ObserverRegistry& registry) {
    if (c.id.empty()) throw AuthError(AuthError::Code::InvalidCondition, "condition id must not be empty");
    for (const auto& existing : conditions_) {
        if (existing.id == c.id) {
            throw AuthError(AuthError::Code::DuplicateCondition, "condition '" + c.id.str() + "' already defined");
        }
    }
    if (c.phi_refs.empty()) {
        throw AuthError(AuthError::Code::InvalidCondition, "condition '" + c.id.str() + "' references no phi");
    }
    std::set<PhiId> seen;
    for (const auto& ref : c.phi_refs) {
        if (!registry.has_phi(ref)) {
            throw AuthError(AuthError::Code::InvalidCondition,
                            "condition '" + c.id.str() + "' references unknown phi '" + ref.str() + "'");
        }
        if (!seen.insert(ref).second) {
            throw AuthError(AuthError::Code::InvalidCondition,
                            "condition '" + c.id.str() + "' lists phi '" + ref.str() + "' twice");
        }
    }
    if (!c.scope.any && c.scope.subjects.empty()) {
        throw AuthError(AuthError::Code::InvalidCondition, "condition '" + c.id.str() + "' applies to no subject");
    }
    conditions_.push_back(std::move(c));
}

std::vector<const Condition*> AuthzEngine::scoped(const SubjectId& subject, const Target& target) const {
    std::vector<const Condition*> out;
    for (const auto& c : conditions_) {
        if (c.target == target && c.scope.contains(subject)) out.push_back(&c);
    }
    return out;
}

bool AuthzEngine::evaluate_pi(const Condition& c, const RegistryView& view) const {
    return std::all_of(c.phi_refs.begin(), c.phi_refs.end(), [&](const PhiId& ref) {
        return view.registry.status(view.registry.phi(ref).observer, view.now) == ObserverStatus::Usable;
    });
}

bool AuthzEngine::evaluate_gamma(const Condition& c, const std::map<PhiId, bool>& phi_values) const {
    bool all = true;
    for (const auto& ref : c.phi_refs) {
        auto it = phi_values.find(ref);
        if (it == phi_values.end()) {
            throw ContractViolation("enforcement of condition '" + c.id.str() + "' without a value for phi '" +
                                    ref.str() + "' (prerequisite does not hold)");
        }
        all = all && it->second;
    }
    return all;
}

ConditionVerdict AuthzEngine::evaluate_condition(const Condition& c, const RegistryView& view) const {
    ConditionVerdict v;
    v.condition_id = c.id;
    std::map<PhiId, bool> values;
    for (const auto& ref : c.phi_refs) {
        auto reading = view.registry.read_phi(ref, view.now);
        switch (reading.status) {
        case ObserverStatus::Missing: v.contributing[ref] = PhiContribution::Missing; break;
        case ObserverStatus::Unauthenticated: v.contributing[ref] = PhiContribution::Unauthenticated; break;
        case ObserverStatus::Usable:
            v.contributing[ref] = reading.value ? PhiContribution::True : PhiContribution::False;
            values[ref] = reading.value;
            break;
        }
    }
    v.pi_holds = evaluate_pi(c, view);
    if (v.pi_holds) v.gamma_holds = evaluate_gamma(c, values);
    return v;
}

AuthorizationResult AuthzEngine::evaluate_authorization(const SubjectId& subject, const Target& target,
                                                        const RegistryView& view) const {
    AuthorizationResult r;
    bool any = false;
    for (const auto* c : scoped(subject, target)) {
        r.verdicts.push_back(evaluate_condition(*c, view));
        any = any || r.verdicts.back().satisfied();
    }
    r.state = any ? AuthState::Authorized : AuthState::Unauthorized;
    return r;
}

AuthState AuthzEngine::authenticate(AuthSession& s, std::string_view credential) const {
    auto it = credentials_.find(s.subject());
    if (it == credentials_.end()) {
        throw AuthError(AuthError::Code::UnknownSubject, "unknown subject '" + s.subject().str() + "'");
    }
    if (s.state_ != AuthState::Unauthenticated) {
        throw ContractViolation("authenticate on a session that is already " + std::string(to_string(s.state_)));
    }
    if (it->second == credential) s.state_ = AuthState::Authenticated;
    return s.state_;
}

Transition AuthzEngine::authorize(AuthSession& s, const RegistryView& view) const {
    if (s.state_ != AuthState::Authenticated) {
        throw ContractViolation("authorize needs an Authenticated session, got " + std::string(to_string(s.state_)));
    }
    auto result = evaluate_authorization(s.subject_, s.target_, view);
    Transition t{s.id_, s.subject_, s.target_, s.state_, result.state, view.now,
                 result.state == AuthState::Authorized ? TransitionCause::Grant : TransitionCause::Deny};
    s.state_ = result.state;
    s.granted_by_ = result.satisfied();
    if (s.mode_ == AuthMode::QuasiStatic && s.state_ == AuthState::Authorized) {
        s.lease_expiry_ = view.now + s.lease_duration_;
    }
    return t;
}

std::optional<Transition> AuthzEngine::on_context_event(AuthSession& s, const RegistryView& view) const {
    if (s.mode_ != AuthMode::Dynamic) return std::nullopt;
    if (s.state_ != AuthState::Authorized && s.state_ != AuthState::Unauthorized) return std::nullopt;
    auto result = evaluate_authorization(s.subject_, s.target_, view);
    s.granted_by_ = result.satisfied();
    if (result.state == s.state_) return std::nullopt;
    Transition t{s.id_, s.subject_, s.target_, s.state_, result.state, view.now,
                 result.state == AuthState::Authorized ? TransitionCause::ContextRegranted
                                                       : TransitionCause::ContextRevoked};
    s.state_ = result.state;
    return t;
}

std::optional<Transition> AuthzEngine::on_lease_tick(AuthSession& s, Ms now) const {
    if (s.mode_ != AuthMode::QuasiStatic || s.state_ != AuthState::Authorized) return std::nullopt;
    if (!s.lease_expiry_ || now < *s.lease_expiry_) return std::nullopt;
    Transition t{s.id_, s.subject_, s.target_, s.state_, AuthState::Unauthorized, now, TransitionCause::LeaseExpired};
    s.state_ = AuthState::Unauthorized;
    s.granted_by_.clear();
    return t;
}

RenewResult AuthzEngine::renew(AuthSession& s, const RegistryView& view) const {
    if (s.mode_ != AuthMode::QuasiStatic) throw ContractViolation("renew applies to quasi-static sessions only");
    if (s.state_ != AuthState::Authorized && s.state_ != AuthState::Unauthorized) {
        throw ContractViolation("renew on a session that was never authorized");
    }
    auto result = evaluate_authorization(s.subject_, s.target_, view);
    RenewResult out;
    out.granted = result.state == AuthState::Authorized;
    s.granted_by_ = result.satisfied();
    if (out.granted) {
        s.lease_expiry_ = std::max(view.now, s.lease_expiry_.value_or(view.now)) + s.lease_duration_;
    }
    if (out.granted && s.state_ != AuthState::Authorized) {
        out.transition = Transition{s.id_, s.subject_, s.target_, s.state_, AuthState::Authorized, view.now,
                                    TransitionCause::Renewed};
        s.state_ = AuthState::Authorized;
    } else if (!out.granted && s.state_ == AuthState::Authorized) {
        out.transition = Transition{s.id_, s.subject_, s.target_, s.state_, AuthState::Unauthorized, view.now,
                                    TransitionCause::RenewalDenied};
        s.state_ = AuthState::Unauthorized;
    }
    return out;
}

std::optional<Transition> AuthzEngine::logoff(AuthSession& s, Ms now) const {
    if (s.state_ == AuthState::Unauthenticated) return std::nullopt;
    Transition t{s.id_, s.subject_, s.target_, s.state_, AuthState::Unauthenticated, now, TransitionCause::Logoff};
    s.state_ = AuthState::Unauthenticated;
    s.granted_by_.clear();
    s.lease_expiry_.reset();
    return t;
}

} // namespace ctxauth::authz
