#include "ctxauth/sim/network.hpp"

namespace ctxauth::sim {

JitterSource::JitterSource(std::uint64_t seed, JitterBounds bounds) : gen_(seed), bounds_(bounds) {
    if (bounds_.lo < 0 || bounds_.hi < bounds_.lo) throw NetworkError("jitter bounds must satisfy 0 <= lo <= hi");
}

Ms JitterSource::draw() {
    if (bounds_.hi == bounds_.lo) return bounds_.lo;
    const auto span = static_cast<std::uint64_t>(bounds_.hi - bounds_.lo) + 1;
    return bounds_.lo + static_cast<Ms>(gen_() % span);
}

Network::Network(Scheduler& scheduler, std::uint64_t seed, JitterBounds jitter)
    : scheduler_(scheduler), jitter_(seed, jitter) {}

void Network::add_node(const NodeId& node) {
    nodes_.insert(node);
}

void Network::add_link(const Link& link) {
    if (!has_node(link.from)) throw NetworkError("unknown node '" + link.from.str() + "'");
    if (!has_node(link.to)) throw NetworkError("unknown node '" + link.to.str() + "'");
    if (link.latency < 0) throw NetworkError("link latency must be non-negative");
    if (link.hops < 1) throw NetworkError("link hop count must be positive");
    links_[{link.from, link.to}] = link;
}

void Network::connect(const NodeId& a, const NodeId& b, Ms latency, int hops) {
    add_link(Link{a, b, latency, hops});
    add_link(Link{b, a, latency, hops});
}

const Link& Network::link(const NodeId& from, const NodeId& to) const {
    auto it = links_.find({from, to});
    if (it == links_.end()) {
        if (!has_node(from)) throw NetworkError("unknown node '" + from.str() + "'");
        if (!has_node(to)) throw NetworkError("unknown node '" + to.str() + "'");
        throw NetworkError("no link " + from.str() + " -> " + to.str());
    }
    return it->second;
}

bool Network::has_link(const NodeId& from, const NodeId& to) const {
    return links_.contains({from, to});
}

Ms Network::nominal_delay(const NodeId& from, const NodeId& to) const {
    const auto& l = link(from, to);
    return l.latency * l.hops;
}

EventId Network::send(const NodeId& from, const NodeId& to, Kind kind, Detail detail, Handler handler) {
    const Ms now = scheduler_.now();
    Ms due = now + nominal_delay(from, to) + jitter_.draw();
    auto& last = last_delivery_[{from, to}];
    if (due < last) due = last;
    last = due;
    detail.add("sent", now);
    return scheduler_.schedule(due, kind, from, to, std::move(detail), std::move(handler));
}

std::vector<NodeId> Network::neighbours(const NodeId& from) const {
    std::vector<NodeId> out;
    for (const auto& [key, l] : links_) {
        if (key.first == from) out.push_back(key.second);
    }
    return out;
}

} // namespace ctxauth::sim
