#pragma once

#include "ctxauth/patterns/sessions.hpp"

namespace ctxauth::patterns {

enum class RequestStatus { Running, Completed, Aborted };
std::string_view to_string(RequestStatus status) noexcept;

struct InFlightRequest {
    std::uint64_t id = 0;
    SubjectId consumer;
    ServiceId producer;
    Ms started = 0;
    Ms duration = 0;
    RequestStatus status = RequestStatus::Running;
    SessionId session = 0;

    Ms due() const { return started + duration; }
};

enum class ReplyKind { Response, AccessDenied };
std::string_view to_string(ReplyKind kind) noexcept;

struct Reply {
    std::uint64_t request = 0;
    SubjectId consumer;
    ServiceId producer;
    ReplyKind kind = ReplyKind::AccessDenied;
    SessionId session = 0;  // 0 when the request was refused on arrival
    // Set on a Response sent while the consumer's context was not valid.
    bool leaked = false;
};

struct RequestResult {
    std::optional<InFlightRequest> accepted;  // completion due at accepted->due()
    std::optional<Reply> denied;              // immediate AccessDenied
    std::optional<DenialReason> denial;
    std::vector<Transition> transitions;
};

// One authorization session per (consumer, service), reused across requests
// while it stays authorized. Each request re-checks the credential.
class RequestResponseService {
public:
    explicit RequestResponseService(SessionTable& sessions) : sessions_(sessions) {}

    void add_service(const ServiceId& service, Target target);
    bool has_service(const ServiceId& service) const { return services_.contains(service); }
    const Target& target(const ServiceId& service) const;

    // Throws PatternError for unknown services, ContractViolation for duration <= 0.
    RequestResult request(const SubjectId& consumer, const ServiceId& service, std::string_view credential,
                          Ms duration, const context::RegistryView& view);

    // Processing finished: Response if the session is still authorized at
    // view.now, otherwise AccessDenied. Throws for unknown or finished requests.
    Reply complete(std::uint64_t request, const context::RegistryView& view);

    // Dynamic revocations abort every running request on the session.
    std::vector<Reply> on_transition(const Transition& transition);

    const InFlightRequest& get(std::uint64_t request) const;
    const std::map<std::uint64_t, InFlightRequest>& requests() const noexcept { return requests_; }

private:
    using Key = std::pair<SubjectId, ServiceId>;

    SessionTable& sessions_;
    std::map<ServiceId, Target> services_;
    std::map<Key, SessionId> bindings_;
    std::map<std::uint64_t, InFlightRequest> requests_;
    std::uint64_t next_request_ = 1;
};

} // namespace ctxauth::patterns
