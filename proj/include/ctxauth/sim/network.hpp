#pragma once

#include "ctxauth/sim/scheduler.hpp"

#include <map>
#include <random>
#include <set>

namespace ctxauth::sim {

struct Link {
    NodeId from;
    NodeId to;
    Ms latency = 0;  // per hop
    int hops = 1;
};

struct JitterBounds {
    Ms lo = 0;
    Ms hi = 0;
    bool operator==(const JitterBounds&) const = default;
};

// Jitter generator: std::mt19937_64 seeded with the scenario seed; one draw
// per send is `lo + (gen() % (hi - lo + 1))`. Both pieces are fully specified
// by the standard, so traces reproduce across standard libraries.
class JitterSource {
public:
    explicit JitterSource(std::uint64_t seed, JitterBounds bounds = {});
    Ms draw();
    const JitterBounds& bounds() const noexcept { return bounds_; }

private:
    std::mt19937_64 gen_;
    JitterBounds bounds_;
};

class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Simulated network on top of the scheduler. Delivery time is
// send time + latency * hops + jitter, clamped so that messages on one
// ordered (from, to) pair never overtake each other.
class Network {
public:
    Network(Scheduler& scheduler, std::uint64_t seed, JitterBounds jitter = {});

    void add_node(const NodeId& node);
    bool has_node(const NodeId& node) const { return nodes_.contains(node); }

    // Directed link. Throws NetworkError for unknown endpoints, negative
    // latency or non-positive hop count.
    void add_link(const Link& link);
    void connect(const NodeId& a, const NodeId& b, Ms latency, int hops);

    const Link& link(const NodeId& from, const NodeId& to) const;
    bool has_link(const NodeId& from, const NodeId& to) const;
    Ms nominal_delay(const NodeId& from, const NodeId& to) const;

    // Schedules delivery of a message. The detail gains `sent=<now>`.
    EventId send(const NodeId& from, const NodeId& to, Kind kind, Detail detail, Handler handler);

    const std::set<NodeId>& nodes() const noexcept { return nodes_; }
    std::vector<NodeId> neighbours(const NodeId& from) const;

    Scheduler& scheduler() noexcept { return scheduler_; }

private:
    Scheduler& scheduler_;
    JitterSource jitter_;
    std::set<NodeId> nodes_;
    std::map<std::pair<NodeId, NodeId>, Link> links_;
    std::map<std::pair<NodeId, NodeId>, Ms> last_delivery_;
};

} // namespace ctxauth::sim
