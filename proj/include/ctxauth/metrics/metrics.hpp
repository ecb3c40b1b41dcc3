#pragma once

#include "ctxauth/authz/types.hpp"
#include "ctxauth/sim/trace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ctxauth::metrics {

using authz::AuthMode;
using sim::Trace;

class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Context change to revocation, per session. The producer learns of the
// change at `invalidated`; in lease-based modes it acts later, at `revoked`.
//   total = t_observer + t_phi + t_comm + t_lease_wait
struct ReactionTime {
    std::uint64_t session = 0;
    std::string subject;
    std::string cause;  // transition cause of the revocation
    std::int64_t change = 0;
    Ms injected = 0;
    Ms invalidated = 0;
    Ms revoked = 0;
    Ms t_observer = 0;
    Ms t_phi = 0;
    Ms t_comm = 0;
    Ms t_lease_wait = 0;
    Ms total = 0;
};

// Pairs every revocation with the context invalidation that is still open
// for its session. A context-driven revocation without one throws
// AnalysisError.
std::vector<ReactionTime> compute_reaction_times(const Trace& trace);

struct MessageCount {
    AuthMode mode = AuthMode::Static;
    Ms t0 = 0;
    Ms t1 = 0;
    std::uint64_t subscribes = 0;       // Subscribe and RegisterInterest arrivals
    std::uint64_t renewals = 0;         // Renew messages, attributed to the expiry they renew
    std::uint64_t context_updates = 0;  // observer messages reaching the engine
    std::uint64_t authorization_messages = 0;
};

// Window is closed: [t0, t1]. Static counts subscribes, QuasiStatic adds
// renewals, Dynamic adds context updates.
MessageCount compute_message_counts(const Trace& trace, AuthMode mode, Ms t0, Ms t1);

// Interval in which a session was authorized while its context was not.
// Bounds are trace positions; end is empty when the window was still open
// at the end of the trace.
struct LeakReport {
    std::uint64_t session = 0;
    std::string subscriber;
    std::string target;
    Ms window_start = 0;
    std::optional<Ms> window_end;
    std::size_t start_index = 0;
    std::optional<std::size_t> end_index;
    std::uint64_t leaked_deliveries = 0;
    std::vector<std::size_t> deliveries;  // indices of the leaked Send records
};

std::vector<LeakReport> compute_leaks(const Trace& trace);

struct InvariantConfig {
    AuthMode mode = AuthMode::Dynamic;
    Ms lease_ms = 0;
    Ms jitter_spread = 0;  // hi - lo
    Ms end = 0;            // simulated end of the run
};

// Trace-level checks; one message per violation.
std::vector<std::string> check_invariants(const Trace& trace, const InvariantConfig& config);

// Lower median of the totals; 0 for an empty list.
Ms median_total(const std::vector<ReactionTime>& reactions);
Ms max_total(const std::vector<ReactionTime>& reactions);

struct Summary {
    std::string scenario;
    AuthMode mode = AuthMode::Dynamic;
    Ms lease_ms = 0;
    std::uint64_t seed = 0;
    std::uint64_t events = 0;
    std::uint64_t reactions = 0;
    Ms reaction_max_ms = 0;
    Ms reaction_median_ms = 0;
    Ms lease_wait_max_ms = 0;
    MessageCount messages;
    std::uint64_t leak_windows = 0;
    std::uint64_t leaked_deliveries = 0;
    std::uint64_t deliveries = 0;
    std::uint64_t rotations = 0;
    std::uint64_t responses = 0;
    std::uint64_t access_denied = 0;
    std::uint64_t violations = 0;
    std::vector<std::string> violation_messages;
};

struct SummaryInput {
    std::string scenario;
    AuthMode mode = AuthMode::Dynamic;
    Ms lease_ms = 0;
    std::uint64_t seed = 0;
    Ms jitter_spread = 0;
    Ms end = 0;
};

// Runs every analysis; analysis errors are reported as violations.
Summary summarize(const Trace& trace, const SummaryInput& input);

std::string to_key_value(const Summary& summary);
std::string to_yaml(const Summary& summary);

} // namespace ctxauth::metrics
