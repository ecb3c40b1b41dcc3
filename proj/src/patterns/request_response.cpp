#include "ctxauth/patterns/request_response.hpp"

namespace ctxauth::patterns {

std::string_view to_string(RequestStatus status) noexcept {
    switch (status) {
    case RequestStatus::Running: return "running";
    case RequestStatus::Completed: return "completed";
    case RequestStatus::Aborted: return "aborted";
    }
    return "?";
}

std::string_view to_string(ReplyKind kind) noexcept {
    return kind == ReplyKind::Response ? "response" : "access-denied";
}

void RequestResponseService::add_service(const ServiceId& service, Target target) {
    if (!services_.emplace(service, std::move(target)).second) {
        throw PatternError(PatternError::Code::Duplicate, "service '" + service.str() + "' already exists");
    }
}

const Target& RequestResponseService::target(const ServiceId& service) const {
    auto it = services_.find(service);
    if (it == services_.end()) throw PatternError(PatternError::Code::UnknownService, "unknown service '" + service.str() + "'");
    return it->second;
}

RequestResult RequestResponseService::request(const SubjectId& consumer, const ServiceId& service,
                                              std::string_view credential, Ms duration,
                                              const context::RegistryView& view) {
    const Target& tgt = target(service);
    if (duration <= 0) throw ContractViolation("request duration must be positive");
    RequestResult out;
    const std::uint64_t id = next_request_++;
    auto deny = [&](DenialReason reason) {
        out.denial = reason;
        out.denied = Reply{id, consumer, service, ReplyKind::AccessDenied, 0, false};
        return out;
    };

    Key key{consumer, service};
    std::optional<SessionId> session;
    if (auto it = bindings_.find(key); it != bindings_.end()) {
        if (!sessions_.engine().check_credential(consumer, credential)) return deny(DenialReason::BadCredential);
        auto& s = sessions_.at(it->second);
        if (s.authorized_at(view.now)) {
            session = it->second;
        } else if (sessions_.mode() == AuthMode::Dynamic) {
            return deny(DenialReason::NotAuthorized);
        } else {
            // Expired lease: start over with a new session.
            if (auto t = sessions_.engine().on_lease_tick(s, view.now)) out.transitions.push_back(*t);
            sessions_.discard(it->second);
            bindings_.erase(it);
        }
    }
    if (!session) {
        auto admission = sessions_.admit(consumer, tgt, credential, view);
        out.transitions.insert(out.transitions.end(), admission.transitions.begin(), admission.transitions.end());
        if (!admission.granted()) return deny(*admission.denial);
        session = *admission.session;
        bindings_[key] = *session;
    }
    auto& req = requests_[id];
    req = InFlightRequest{id, consumer, service, view.now, duration, RequestStatus::Running, *session};
    out.accepted = req;
    return out;
}

Reply RequestResponseService::complete(std::uint64_t request, const context::RegistryView& view) {
    auto it = requests_.find(request);
    if (it == requests_.end()) throw PatternError(PatternError::Code::UnknownRequest, "unknown request " + std::to_string(request));
    auto& req = it->second;
    if (req.status != RequestStatus::Running) {
        throw ContractViolation("request " + std::to_string(request) + " already " + std::string(to_string(req.status)));
    }
    const bool authorized = sessions_.contains(req.session) && sessions_.at(req.session).authorized_at(view.now);
    if (!authorized) {
        req.status = RequestStatus::Aborted;
        return Reply{req.id, req.consumer, req.producer, ReplyKind::AccessDenied, req.session, false};
    }
    req.status = RequestStatus::Completed;
    return Reply{req.id, req.consumer, req.producer, ReplyKind::Response, req.session,
                 !sessions_.context_valid(req.session, view)};
}

std::vector<Reply> RequestResponseService::on_transition(const Transition& t) {
    std::vector<Reply> out;
    if (t.cause != authz::TransitionCause::ContextRevoked) return out;
    for (auto& [id, req] : requests_) {
        if (req.session != t.session || req.status != RequestStatus::Running) continue;
        req.status = RequestStatus::Aborted;
        out.push_back(Reply{id, req.consumer, req.producer, ReplyKind::AccessDenied, req.session, false});
    }
    return out;
}

const InFlightRequest& RequestResponseService::get(std::uint64_t request) const {
    auto it = requests_.find(request);
    if (it == requests_.end()) throw PatternError(PatternError::Code::UnknownRequest, "unknown request " + std::to_string(request));
    return it->second;
}

} // namespace ctxauth::patterns
