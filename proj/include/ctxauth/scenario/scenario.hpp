#pragma once

#include "ctxauth/authz/types.hpp"
#include "ctxauth/context/phi.hpp"
#include "ctxauth/sim/network.hpp"

#include <filesystem>
#include <map>

namespace ctxauth::scenario {

// Parse or validation failure, anchored to a 1-based line of the source.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line), message_(message) {}
    int line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

private:
    int line_;
    std::string message_;
};

struct LinkSpec {
    NodeId from;
    NodeId to;
    Ms latency_ms = 0;
    int hops = 1;
    int line = 0;
};

struct ObserverSpec {
    ObserverId id;
    NodeId node;
    std::optional<std::string> secret;  // no secret: readings never authenticate
    std::optional<Ms> freshness_ms;
    Ms sense_delay_ms = 0;
    int line = 0;
};

struct PhiSpec {
    context::PhiPredicate phi;
    int line = 0;
};

struct ConditionSpec {
    authz::Condition condition;
    int line = 0;
};

struct SubjectSpec {
    SubjectId id;
    NodeId node;
    std::string secret;
    int line = 0;
};

enum class ChannelKind { PubSub, Broadcast };
std::string_view to_string(ChannelKind kind) noexcept;

struct ChannelSpec {
    ChannelId id;
    ChannelKind kind = ChannelKind::PubSub;
    std::string operation;
    int line = 0;
};

struct ServiceSpec {
    ServiceId id;
    std::string operation;
    int line = 0;
};

enum class Action {
    Value,
    Appear,
    Disappear,
    Subscribe,
    Unsubscribe,
    Notify,
    Request,
    Announce,
    Register,
    Broadcast,
    Rotate,
};
std::string_view to_string(Action action) noexcept;
std::optional<Action> parse_action(std::string_view text) noexcept;

struct Repeat {
    Ms every = 0;
    Ms until = 0;
    bool operator==(const Repeat&) const = default;
};

struct TimelineEntry {
    Ms at = 0;
    Action action = Action::Value;
    std::optional<ObserverId> observer;
    std::optional<context::Value> value;
    bool tamper = false;
    std::optional<SubjectId> subject;
    std::optional<std::string> credential;  // defaults to the subject's secret
    std::optional<ChannelId> channel;
    std::optional<ServiceId> service;
    Ms duration = 0;
    std::optional<std::string> payload;
    std::optional<Repeat> repeat;
    int line = 0;
};

struct Scenario {
    static constexpr Ms kDefaultLease = 1'800'000;
    static constexpr Ms kLeaseFloor = 60'000;

    std::string name;
    std::uint64_t seed = 0;
    authz::AuthMode mode = authz::AuthMode::Dynamic;
    Ms lease_ms = kDefaultLease;
    Ms renew_lead_ms = 1000;
    sim::JitterBounds jitter;
    NodeId engine;
    Ms default_freshness_ms = 5000;
    Ms duration_ms = 0;

    std::vector<NodeId> nodes;
    std::vector<LinkSpec> links;
    std::vector<ObserverSpec> observers;
    std::vector<PhiSpec> phis;
    std::vector<ConditionSpec> conditions;
    std::vector<SubjectSpec> subjects;
    std::vector<ChannelSpec> channels;
    std::vector<ServiceSpec> services;
    std::vector<TimelineEntry> timeline;

    // Source line of each top-level key; 1 for keys that were not written.
    std::map<std::string, int> key_lines;
    int line_of(const std::string& key) const;

    const ObserverSpec* observer(const ObserverId& id) const;
    const SubjectSpec* subject(const SubjectId& id) const;
    const ChannelSpec* channel(const ChannelId& id) const;
    const ServiceSpec* service(const ServiceId& id) const;
};

// YAML text to scenario. Validates; throws ScenarioError.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

// Canonical YAML: fixed key order, double-quoted strings, shortest numbers.
std::string serialize_scenario(const Scenario& scenario);

// Cross-reference and ordering checks; throws ScenarioError at the
// offending entry's line.
void validate(const Scenario& scenario);

// Non-fatal remarks, e.g. a lease below the documented floor.
std::vector<std::string> warnings(const Scenario& scenario);

struct Overrides {
    std::optional<authz::AuthMode> mode;
    std::optional<Ms> lease_ms;
    std::optional<std::uint64_t> seed;
    std::optional<sim::JitterBounds> jitter;
};

Scenario apply(Scenario scenario, const Overrides& overrides);

} // namespace ctxauth::scenario
