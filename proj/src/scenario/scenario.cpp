#include "ctxauth/scenario/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace ctxauth::scenario {

using context::Coord;
using context::PhiExpr;
using context::PhiOp;
using context::Value;

std::string_view to_string(ChannelKind kind) noexcept {
    return kind == ChannelKind::Broadcast ? "broadcast" : "pubsub";
}

namespace {

constexpr std::pair<Action, std::string_view> kActions[] = {
    {Action::Value, "value"},         {Action::Appear, "appear"},       {Action::Disappear, "disappear"},
    {Action::Subscribe, "subscribe"}, {Action::Unsubscribe, "unsubscribe"}, {Action::Notify, "notify"},
    {Action::Request, "request"},     {Action::Announce, "announce"},   {Action::Register, "register"},
    {Action::Broadcast, "broadcast"}, {Action::Rotate, "rotate"},
};

} // namespace

std::string_view to_string(Action action) noexcept {
    for (auto [a, name] : kActions) {
        if (a == action) return name;
    }
    return "?";
}

std::optional<Action> parse_action(std::string_view text) noexcept {
    for (auto [a, name] : kActions) {
        if (name == text) return a;
    }
    return std::nullopt;
}

namespace {

template <class T, class Id>
const T* find_by_id(const std::vector<T>& items, const Id& id) {
    for (const auto& item : items) {
        if (item.id == id) return &item;
    }
    return nullptr;
}

} // namespace

int Scenario::line_of(const std::string& key) const {
    auto it = key_lines.find(key);
    return it == key_lines.end() ? 1 : it->second;
}

const ObserverSpec* Scenario::observer(const ObserverId& id) const { return find_by_id(observers, id); }
const SubjectSpec* Scenario::subject(const SubjectId& id) const { return find_by_id(subjects, id); }
const ChannelSpec* Scenario::channel(const ChannelId& id) const { return find_by_id(channels, id); }
const ServiceSpec* Scenario::service(const ServiceId& id) const { return find_by_id(services, id); }

// ---------------------------------------------------------------------------
// reading

namespace {

int line_of(const YAML::Node& n) {
    const auto m = n.Mark();
    return m.line >= 0 ? m.line + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) { throw ScenarioError(line_of(n), msg); }

void expect_map(const YAML::Node& n, std::string_view what) {
    if (!n.IsMap()) fail(n, std::string(what) + " must be a mapping");
}

void expect_seq(const YAML::Node& n, std::string_view what) {
    if (!n.IsSequence()) fail(n, std::string(what) + " must be a list");
}

void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed, std::string_view what) {
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        bool ok = false;
        for (auto a : allowed) ok = ok || a == key;
        if (!ok) fail(kv.first, "unknown field '" + key + "' in " + std::string(what));
    }
}

YAML::Node require(const YAML::Node& map, const char* key, std::string_view what) {
    auto n = map[key];
    if (!n) fail(map, std::string(what) + " is missing field '" + key + "'");
    return n;
}

std::string scalar(const YAML::Node& n, std::string_view what) {
    if (!n.IsScalar()) fail(n, std::string(what) + " must be a scalar");
    return n.Scalar();
}

std::string text(const YAML::Node& n, std::string_view what) {
    auto s = scalar(n, what);
    if (s.empty()) fail(n, std::string(what) + " must not be empty");
    return s;
}

template <class Int>
Int integer(const YAML::Node& n, std::string_view what) {
    const auto s = scalar(n, what);
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail(n, std::string(what) + " must be an integer, got '" + s + "'");
    return v;
}

std::optional<double> as_number(const std::string& s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

double number(const YAML::Node& n, std::string_view what) {
    const auto s = scalar(n, what);
    auto v = as_number(s);
    if (!v) fail(n, std::string(what) + " must be a number, got '" + s + "'");
    return *v;
}

bool boolean(const YAML::Node& n, std::string_view what) {
    const auto s = scalar(n, what);
    if (s == "true") return true;
    if (s == "false") return false;
    fail(n, std::string(what) + " must be true or false");
}

// Quoted scalars are strings; plain ones are booleans or numbers when they
// read as such; a two-element list is a coordinate.
Value value(const YAML::Node& n, std::string_view what) {
    if (n.IsSequence()) {
        if (n.size() != 2) fail(n, std::string(what) + ": a coordinate needs exactly two numbers");
        return Coord{number(n[0], what), number(n[1], what)};
    }
    const auto s = scalar(n, what);
    if (n.Tag() == "!") return s;
    if (s == "true") return true;
    if (s == "false") return false;
    if (auto d = as_number(s)) return *d;
    return s;
}

std::vector<Value> values(const YAML::Node& n, std::string_view what) {
    expect_seq(n, what);
    std::vector<Value> out;
    for (const auto& item : n) out.push_back(value(item, what));
    return out;
}

PhiExpr expr(const YAML::Node& n) {
    expect_map(n, "expr");
    check_keys(n, {"op", "value", "lo", "hi", "center", "radius", "members", "of"}, "expr");
    const auto op_text = text(require(n, "op", "expr"), "op");
    auto op = context::parse_phi_op(op_text);
    if (!op) fail(n["op"], "unknown phi operator '" + op_text + "'");
    PhiExpr e;
    e.op = *op;
    switch (*op) {
    case PhiOp::Eq:
    case PhiOp::Neq:
    case PhiOp::Lt:
    case PhiOp::Le:
    case PhiOp::Gt:
    case PhiOp::Ge: e.operands.push_back(value(require(n, "value", "expr"), "value")); break;
    case PhiOp::InRange:
        e.operands.push_back(value(require(n, "lo", "expr"), "lo"));
        e.operands.push_back(value(require(n, "hi", "expr"), "hi"));
        break;
    case PhiOp::InZone:
        e.operands.push_back(value(require(n, "center", "expr"), "center"));
        e.operands.push_back(value(require(n, "radius", "expr"), "radius"));
        break;
    case PhiOp::InSet: e.operands = values(require(n, "members", "expr"), "members"); break;
    case PhiOp::And:
    case PhiOp::Or:
    case PhiOp::Not: {
        auto of = require(n, "of", "expr");
        expect_seq(of, "of");
        for (const auto& child : of) e.children.push_back(expr(child));
        break;
    }
    }
    try {
        context::validate(e);
    } catch (const context::PhiDefinitionError& err) {
        fail(n, err.what());
    }
    return e;
}

template <class F>
void each(const YAML::Node& root, const char* key, F&& f) {
    auto list = root[key];
    if (!list) return;
    expect_seq(list, key);
    for (const auto& item : list) f(item);
}

Scenario read(const YAML::Node& root) {
    expect_map(root, "scenario");
    check_keys(root,
               {"name", "seed", "mode", "lease_ms", "renew_lead_ms", "jitter_ms", "engine", "default_freshness_ms",
                "duration_ms", "nodes", "links", "observers", "phis", "conditions", "subjects", "channels",
                "services", "timeline"},
               "scenario");
    Scenario sc;
    for (const auto& kv : root) sc.key_lines[kv.first.Scalar()] = line_of(kv.second);
    sc.name = text(require(root, "name", "scenario"), "name");
    sc.seed = integer<std::uint64_t>(require(root, "seed", "scenario"), "seed");
    if (auto m = root["mode"]) {
        auto mode = authz::parse_mode(scalar(m, "mode"));
        if (!mode) fail(m, "unknown mode '" + m.Scalar() + "' (static, quasi, dynamic)");
        sc.mode = *mode;
    }
    if (auto n = root["lease_ms"]) sc.lease_ms = integer<Ms>(n, "lease_ms");
    if (auto n = root["renew_lead_ms"]) sc.renew_lead_ms = integer<Ms>(n, "renew_lead_ms");
    if (auto n = root["jitter_ms"]) {
        expect_seq(n, "jitter_ms");
        if (n.size() != 2) fail(n, "jitter_ms needs [lo, hi]");
        sc.jitter = {integer<Ms>(n[0], "jitter_ms"), integer<Ms>(n[1], "jitter_ms")};
    }
    sc.engine = NodeId(text(require(root, "engine", "scenario"), "engine"));
    if (auto n = root["default_freshness_ms"]) sc.default_freshness_ms = integer<Ms>(n, "default_freshness_ms");
    sc.duration_ms = integer<Ms>(require(root, "duration_ms", "scenario"), "duration_ms");

    each(root, "nodes", [&](const YAML::Node& n) { sc.nodes.emplace_back(text(n, "node")); });
    each(root, "links", [&](const YAML::Node& n) {
        expect_map(n, "link");
        check_keys(n, {"from", "to", "latency_ms", "hops"}, "link");
        LinkSpec l;
        l.from = NodeId(text(require(n, "from", "link"), "from"));
        l.to = NodeId(text(require(n, "to", "link"), "to"));
        l.latency_ms = integer<Ms>(require(n, "latency_ms", "link"), "latency_ms");
        if (auto h = n["hops"]) l.hops = integer<int>(h, "hops");
        l.line = line_of(n);
        sc.links.push_back(std::move(l));
    });
    each(root, "observers", [&](const YAML::Node& n) {
        expect_map(n, "observer");
        check_keys(n, {"id", "node", "secret", "freshness_ms", "sense_delay_ms"}, "observer");
        ObserverSpec o;
        o.id = ObserverId(text(require(n, "id", "observer"), "id"));
        o.node = NodeId(text(require(n, "node", "observer"), "node"));
        if (auto s = n["secret"]) o.secret = text(s, "secret");
        if (auto f = n["freshness_ms"]) o.freshness_ms = integer<Ms>(f, "freshness_ms");
        if (auto d = n["sense_delay_ms"]) o.sense_delay_ms = integer<Ms>(d, "sense_delay_ms");
        o.line = line_of(n);
        sc.observers.push_back(std::move(o));
    });
    each(root, "phis", [&](const YAML::Node& n) {
        expect_map(n, "phi");
        check_keys(n, {"id", "observer", "expr", "processing_ms"}, "phi");
        PhiSpec p;
        p.phi.id = PhiId(text(require(n, "id", "phi"), "id"));
        p.phi.observer = ObserverId(text(require(n, "observer", "phi"), "observer"));
        p.phi.expr = expr(require(n, "expr", "phi"));
        if (auto d = n["processing_ms"]) p.phi.processing_ms = integer<Ms>(d, "processing_ms");
        p.line = line_of(n);
        sc.phis.push_back(std::move(p));
    });
    each(root, "conditions", [&](const YAML::Node& n) {
        expect_map(n, "condition");
        check_keys(n, {"id", "phis", "operation", "object", "subjects"}, "condition");
        ConditionSpec c;
        c.condition.id = ConditionId(text(require(n, "id", "condition"), "id"));
        auto refs = require(n, "phis", "condition");
        expect_seq(refs, "phis");
        for (const auto& r : refs) c.condition.phi_refs.emplace_back(text(r, "phi reference"));
        try {
            c.condition.target = authz::Target(text(require(n, "operation", "condition"), "operation"),
                                               text(require(n, "object", "condition"), "object"));
        } catch (const std::invalid_argument& e) {
            fail(n, e.what());
        }
        c.condition.scope = authz::SubjectScope::wildcard();
        if (auto s = n["subjects"]) {
            expect_seq(s, "subjects");
            std::set<SubjectId> ids;
            bool any = false;
            for (const auto& item : s) {
                auto id = text(item, "subject");
                if (id == "*") any = true;
                else ids.emplace(id);
            }
            if (any && !ids.empty()) fail(s, "subjects mixes '*' with explicit ids");
            c.condition.scope = any ? authz::SubjectScope::wildcard() : authz::SubjectScope::of(std::move(ids));
        }
        c.line = line_of(n);
        sc.conditions.push_back(std::move(c));
    });
    each(root, "subjects", [&](const YAML::Node& n) {
        expect_map(n, "subject");
        check_keys(n, {"id", "node", "secret"}, "subject");
        SubjectSpec s;
        s.id = SubjectId(text(require(n, "id", "subject"), "id"));
        s.node = NodeId(text(require(n, "node", "subject"), "node"));
        s.secret = text(require(n, "secret", "subject"), "secret");
        s.line = line_of(n);
        sc.subjects.push_back(std::move(s));
    });
    each(root, "channels", [&](const YAML::Node& n) {
        expect_map(n, "channel");
        check_keys(n, {"id", "kind", "operation"}, "channel");
        ChannelSpec c;
        c.id = ChannelId(text(require(n, "id", "channel"), "id"));
        if (auto k = n["kind"]) {
            const auto kind = scalar(k, "kind");
            if (kind == "pubsub") c.kind = ChannelKind::PubSub;
            else if (kind == "broadcast") c.kind = ChannelKind::Broadcast;
            else fail(k, "unknown channel kind '" + kind + "' (pubsub, broadcast)");
        }
        c.operation = text(require(n, "operation", "channel"), "operation");
        c.line = line_of(n);
        sc.channels.push_back(std::move(c));
    });
    each(root, "services", [&](const YAML::Node& n) {
        expect_map(n, "service");
        check_keys(n, {"id", "operation"}, "service");
        ServiceSpec s;
        s.id = ServiceId(text(require(n, "id", "service"), "id"));
        s.operation = text(require(n, "operation", "service"), "operation");
        s.line = line_of(n);
        sc.services.push_back(std::move(s));
    });
    each(root, "timeline", [&](const YAML::Node& n) {
        expect_map(n, "timeline entry");
        check_keys(n,
                   {"at", "do", "observer", "value", "tamper", "subject", "credential", "channel", "service",
                    "duration", "payload", "repeat"},
                   "timeline entry");
        TimelineEntry e;
        e.at = integer<Ms>(require(n, "at", "timeline entry"), "at");
        const auto action = scalar(require(n, "do", "timeline entry"), "do");
        auto a = parse_action(action);
        if (!a) fail(n["do"], "unknown action '" + action + "'");
        e.action = *a;
        if (auto v = n["observer"]) e.observer = ObserverId(text(v, "observer"));
        if (auto v = n["value"]) e.value = value(v, "value");
        if (auto v = n["tamper"]) e.tamper = boolean(v, "tamper");
        if (auto v = n["subject"]) e.subject = SubjectId(text(v, "subject"));
        if (auto v = n["credential"]) e.credential = scalar(v, "credential");
        if (auto v = n["channel"]) e.channel = ChannelId(text(v, "channel"));
        if (auto v = n["service"]) e.service = ServiceId(text(v, "service"));
        if (auto v = n["duration"]) e.duration = integer<Ms>(v, "duration");
        if (auto v = n["payload"]) e.payload = scalar(v, "payload");
        if (auto r = n["repeat"]) {
            expect_map(r, "repeat");
            check_keys(r, {"every", "until"}, "repeat");
            e.repeat = Repeat{integer<Ms>(require(r, "every", "repeat"), "every"),
                              integer<Ms>(require(r, "until", "repeat"), "until")};
        }
        e.line = line_of(n);
        sc.timeline.push_back(std::move(e));
    });
    return sc;
}

} // namespace

Scenario parse_scenario(std::string_view source) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(source));
    } catch (const YAML::Exception& e) {
        throw ScenarioError(e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
    }
    if (!root || root.IsNull()) throw ScenarioError(1, "empty scenario");
    Scenario sc;
    try {
        sc = read(root);
    } catch (const YAML::Exception& e) {
        throw ScenarioError(e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
    }
    validate(sc);
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

// ---------------------------------------------------------------------------
// validation

void validate(const Scenario& sc) {
    auto err = [](int line, const std::string& msg) { throw ScenarioError(line, msg); };
    auto key = [&](const char* k) { return sc.line_of(k); };
    if (sc.duration_ms <= 0) err(key("duration_ms"), "duration_ms must be positive");
    if (sc.lease_ms <= 0) err(key("lease_ms"), "lease_ms must be positive");
    if (sc.renew_lead_ms < 0) err(key("renew_lead_ms"), "renew_lead_ms must not be negative");
    if (sc.renew_lead_ms >= sc.lease_ms) err(key("renew_lead_ms"), "renew_lead_ms must be shorter than lease_ms");
    if (sc.jitter.lo < 0 || sc.jitter.hi < sc.jitter.lo) err(key("jitter_ms"), "jitter_ms needs 0 <= lo <= hi");
    if (sc.default_freshness_ms <= 0) err(key("default_freshness_ms"), "default_freshness_ms must be positive");

    std::set<NodeId> nodes;
    for (const auto& n : sc.nodes) {
        if (!nodes.insert(n).second) err(key("nodes"), "duplicate node '" + n.str() + "'");
    }
    if (!nodes.contains(sc.engine)) err(key("engine"), "engine node '" + sc.engine.str() + "' is not listed in nodes");

    std::set<std::pair<NodeId, NodeId>> links;
    for (const auto& l : sc.links) {
        if (!nodes.contains(l.from)) err(l.line, "link from unknown node '" + l.from.str() + "'");
        if (!nodes.contains(l.to)) err(l.line, "link to unknown node '" + l.to.str() + "'");
        if (l.from == l.to) err(l.line, "link from a node to itself");
        if (l.latency_ms < 0) err(l.line, "latency_ms must not be negative");
        if (l.hops < 1) err(l.line, "hops must be positive");
        if (!links.insert({l.from, l.to}).second || !links.insert({l.to, l.from}).second) {
            err(l.line, "duplicate link between '" + l.from.str() + "' and '" + l.to.str() + "'");
        }
    }
    auto reaches_engine = [&](const NodeId& n) { return links.contains({n, sc.engine}); };

    std::set<ObserverId> observers;
    for (const auto& o : sc.observers) {
        if (!observers.insert(o.id).second) err(o.line, "duplicate observer '" + o.id.str() + "'");
        if (!nodes.contains(o.node)) err(o.line, "observer on unknown node '" + o.node.str() + "'");
        if (!reaches_engine(o.node)) err(o.line, "observer node '" + o.node.str() + "' has no link to the engine");
        if (o.freshness_ms && *o.freshness_ms <= 0) err(o.line, "freshness_ms must be positive");
        if (o.sense_delay_ms < 0) err(o.line, "sense_delay_ms must not be negative");
    }
    std::set<PhiId> phis;
    for (const auto& p : sc.phis) {
        if (!phis.insert(p.phi.id).second) err(p.line, "duplicate phi '" + p.phi.id.str() + "'");
        if (!observers.contains(p.phi.observer)) err(p.line, "phi on unknown observer '" + p.phi.observer.str() + "'");
        if (p.phi.processing_ms < 0) err(p.line, "processing_ms must not be negative");
    }
    std::set<SubjectId> subjects;
    for (const auto& s : sc.subjects) {
        if (!subjects.insert(s.id).second) err(s.line, "duplicate subject '" + s.id.str() + "'");
        if (!nodes.contains(s.node)) err(s.line, "subject on unknown node '" + s.node.str() + "'");
        if (!reaches_engine(s.node)) err(s.line, "subject node '" + s.node.str() + "' has no link to the engine");
    }
    std::set<ConditionId> conditions;
    for (const auto& c : sc.conditions) {
        if (!conditions.insert(c.condition.id).second) err(c.line, "duplicate condition '" + c.condition.id.str() + "'");
        if (c.condition.phi_refs.empty()) err(c.line, "condition references no phi");
        std::set<PhiId> seen;
        for (const auto& r : c.condition.phi_refs) {
            if (!phis.contains(r)) err(c.line, "condition references unknown phi '" + r.str() + "'");
            if (!seen.insert(r).second) err(c.line, "condition lists phi '" + r.str() + "' twice");
        }
        for (const auto& s : c.condition.scope.subjects) {
            if (!subjects.contains(s)) err(c.line, "condition scoped to unknown subject '" + s.str() + "'");
        }
    }
    std::set<std::string> objects;
    for (const auto& c : sc.channels) {
        if (!objects.insert(c.id.str()).second) err(c.line, "duplicate channel or service '" + c.id.str() + "'");
    }
    for (const auto& s : sc.services) {
        if (!objects.insert(s.id.str()).second) err(s.line, "duplicate channel or service '" + s.id.str() + "'");
    }

    Ms last = 0;
    std::set<ObserverId> present;
    for (const auto& e : sc.timeline) {
        const auto what = std::string(to_string(e.action));
        if (e.at < 0) err(e.line, "'at' must not be negative");
        if (e.at < last) err(e.line, "timeline is not sorted by time");
        last = e.at;
        if (e.repeat) {
            if (e.repeat->every <= 0) err(e.line, "repeat.every must be positive");
            if (e.repeat->until < e.at) err(e.line, "repeat.until precedes 'at'");
            if (e.action == Action::Appear || e.action == Action::Disappear || e.action == Action::Subscribe ||
                e.action == Action::Unsubscribe || e.action == Action::Register) {
                err(e.line, "'" + what + "' cannot repeat");
            }
        }
        auto need_observer = [&] {
            if (!e.observer) err(e.line, what + " needs 'observer'");
            if (!observers.contains(*e.observer)) err(e.line, "unknown observer '" + e.observer->str() + "'");
        };
        auto need_subject = [&] {
            if (!e.subject) err(e.line, what + " needs 'subject'");
            if (!subjects.contains(*e.subject)) err(e.line, "unknown subject '" + e.subject->str() + "'");
        };
        auto need_channel = [&](std::optional<ChannelKind> kind) {
            if (!e.channel) err(e.line, what + " needs 'channel'");
            const auto* c = sc.channel(*e.channel);
            if (!c) err(e.line, "unknown channel '" + e.channel->str() + "'");
            if (kind && c->kind != *kind) {
                err(e.line, what + " needs a " + std::string(to_string(*kind)) + " channel, '" + c->id.str() +
                                "' is " + std::string(to_string(c->kind)));
            }
        };
        switch (e.action) {
        case Action::Value:
            need_observer();
            if (!e.value) err(e.line, "value needs 'value'");
            if (!present.contains(*e.observer)) err(e.line, "value from observer '" + e.observer->str() + "' before it appears");
            break;
        case Action::Appear:
            need_observer();
            if (!present.insert(*e.observer).second) err(e.line, "observer '" + e.observer->str() + "' is already present");
            break;
        case Action::Disappear:
            need_observer();
            if (!present.erase(*e.observer)) err(e.line, "observer '" + e.observer->str() + "' is not present");
            break;
        case Action::Subscribe: need_subject(); need_channel(ChannelKind::PubSub); break;
        case Action::Register: need_subject(); need_channel(ChannelKind::Broadcast); break;
        case Action::Unsubscribe: need_subject(); need_channel(std::nullopt); break;
        case Action::Notify: need_channel(ChannelKind::PubSub); break;
        case Action::Announce:
        case Action::Broadcast:
        case Action::Rotate: need_channel(ChannelKind::Broadcast); break;
        case Action::Request:
            need_subject();
            if (!e.service) err(e.line, "request needs 'service'");
            if (!sc.service(*e.service)) err(e.line, "unknown service '" + e.service->str() + "'");
            if (e.duration <= 0) err(e.line, "request needs a positive 'duration'");
            break;
        }
    }
}

std::vector<std::string> warnings(const Scenario& sc) {
    std::vector<std::string> out;
    if (sc.mode == authz::AuthMode::QuasiStatic && sc.lease_ms < Scenario::kLeaseFloor) {
        out.push_back("lease_ms " + std::to_string(sc.lease_ms) + " is below the " +
                      std::to_string(Scenario::kLeaseFloor) + " ms security floor");
    }
    return out;
}

Scenario apply(Scenario sc, const Overrides& o) {
    if (o.mode) sc.mode = *o.mode;
    if (o.lease_ms) sc.lease_ms = *o.lease_ms;
    if (o.seed) sc.seed = *o.seed;
    if (o.jitter) sc.jitter = *o.jitter;
    validate(sc);
    return sc;
}

// ---------------------------------------------------------------------------
// writing

namespace {

void emit_value(YAML::Emitter& out, const Value& v) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, double>) {
                out << context::format_number(x);
            } else if constexpr (std::is_same_v<T, Coord>) {
                out << YAML::Flow << YAML::BeginSeq << context::format_number(x.x) << context::format_number(x.y)
                    << YAML::EndSeq;
            } else if constexpr (std::is_same_v<T, std::string>) {
                out << YAML::DoubleQuoted << x;
            } else {
                out << (x ? "true" : "false");
            }
        },
        v);
}

void emit_expr(YAML::Emitter& out, const PhiExpr& e) {
    out << YAML::BeginMap << YAML::Key << "op" << YAML::Value << YAML::DoubleQuoted
        << std::string(context::to_string(e.op));
    switch (e.op) {
    case PhiOp::InRange:
        out << YAML::Key << "lo" << YAML::Value;
        emit_value(out, e.operands.at(0));
        out << YAML::Key << "hi" << YAML::Value;
        emit_value(out, e.operands.at(1));
        break;
    case PhiOp::InZone:
        out << YAML::Key << "center" << YAML::Value;
        emit_value(out, e.operands.at(0));
        out << YAML::Key << "radius" << YAML::Value;
        emit_value(out, e.operands.at(1));
        break;
    case PhiOp::InSet:
        out << YAML::Key << "members" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& v : e.operands) emit_value(out, v);
        out << YAML::EndSeq;
        break;
    case PhiOp::And:
    case PhiOp::Or:
    case PhiOp::Not:
        out << YAML::Key << "of" << YAML::Value << YAML::BeginSeq;
        for (const auto& c : e.children) emit_expr(out, c);
        out << YAML::EndSeq;
        break;
    default:
        out << YAML::Key << "value" << YAML::Value;
        emit_value(out, e.operands.at(0));
        break;
    }
    out << YAML::EndMap;
}

void kv(YAML::Emitter& out, const char* key, const std::string& s) {
    out << YAML::Key << key << YAML::Value << YAML::DoubleQuoted << s;
}

template <class Int>
void kv_int(YAML::Emitter& out, const char* key, Int v) {
    out << YAML::Key << key << YAML::Value << std::to_string(v);
}

} // namespace

std::string serialize_scenario(const Scenario& sc) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    kv(out, "name", sc.name);
    kv_int(out, "seed", sc.seed);
    kv(out, "mode", std::string(authz::to_string(sc.mode)));
    kv_int(out, "lease_ms", sc.lease_ms);
    kv_int(out, "renew_lead_ms", sc.renew_lead_ms);
    out << YAML::Key << "jitter_ms" << YAML::Value << YAML::Flow << YAML::BeginSeq << std::to_string(sc.jitter.lo)
        << std::to_string(sc.jitter.hi) << YAML::EndSeq;
    kv(out, "engine", sc.engine.str());
    kv_int(out, "default_freshness_ms", sc.default_freshness_ms);
    kv_int(out, "duration_ms", sc.duration_ms);

    out << YAML::Key << "nodes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& n : sc.nodes) out << YAML::DoubleQuoted << n.str();
    out << YAML::EndSeq;

    out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : sc.links) {
        out << YAML::Flow << YAML::BeginMap;
        kv(out, "from", l.from.str());
        kv(out, "to", l.to.str());
        kv_int(out, "latency_ms", l.latency_ms);
        kv_int(out, "hops", l.hops);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "observers" << YAML::Value << YAML::BeginSeq;
    for (const auto& o : sc.observers) {
        out << YAML::BeginMap;
        kv(out, "id", o.id.str());
        kv(out, "node", o.node.str());
        if (o.secret) kv(out, "secret", *o.secret);
        if (o.freshness_ms) kv_int(out, "freshness_ms", *o.freshness_ms);
        kv_int(out, "sense_delay_ms", o.sense_delay_ms);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "phis" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : sc.phis) {
        out << YAML::BeginMap;
        kv(out, "id", p.phi.id.str());
        kv(out, "observer", p.phi.observer.str());
        out << YAML::Key << "expr" << YAML::Value;
        emit_expr(out, p.phi.expr);
        kv_int(out, "processing_ms", p.phi.processing_ms);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "conditions" << YAML::Value << YAML::BeginSeq;
    for (const auto& cs : sc.conditions) {
        const auto& c = cs.condition;
        out << YAML::BeginMap;
        kv(out, "id", c.id.str());
        out << YAML::Key << "phis" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& r : c.phi_refs) out << YAML::DoubleQuoted << r.str();
        out << YAML::EndSeq;
        kv(out, "operation", c.target.operation());
        kv(out, "object", c.target.object());
        out << YAML::Key << "subjects" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        if (c.scope.any) out << YAML::DoubleQuoted << "*";
        for (const auto& s : c.scope.subjects) out << YAML::DoubleQuoted << s.str();
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "subjects" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : sc.subjects) {
        out << YAML::Flow << YAML::BeginMap;
        kv(out, "id", s.id.str());
        kv(out, "node", s.node.str());
        kv(out, "secret", s.secret);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "channels" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : sc.channels) {
        out << YAML::Flow << YAML::BeginMap;
        kv(out, "id", c.id.str());
        kv(out, "kind", std::string(to_string(c.kind)));
        kv(out, "operation", c.operation);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : sc.services) {
        out << YAML::Flow << YAML::BeginMap;
        kv(out, "id", s.id.str());
        kv(out, "operation", s.operation);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "timeline" << YAML::Value << YAML::BeginSeq;
    for (const auto& e : sc.timeline) {
        out << YAML::Flow << YAML::BeginMap;
        kv_int(out, "at", e.at);
        kv(out, "do", std::string(to_string(e.action)));
        if (e.observer) kv(out, "observer", e.observer->str());
        if (e.value) {
            out << YAML::Key << "value" << YAML::Value;
            emit_value(out, *e.value);
        }
        if (e.tamper) out << YAML::Key << "tamper" << YAML::Value << "true";
        if (e.subject) kv(out, "subject", e.subject->str());
        if (e.credential) kv(out, "credential", *e.credential);
        if (e.channel) kv(out, "channel", e.channel->str());
        if (e.service) kv(out, "service", e.service->str());
        if (e.duration) kv_int(out, "duration", e.duration);
        if (e.payload) kv(out, "payload", *e.payload);
        if (e.repeat) {
            out << YAML::Key << "repeat" << YAML::Value << YAML::Flow << YAML::BeginMap;
            kv_int(out, "every", e.repeat->every);
            kv_int(out, "until", e.repeat->until);
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
    if (!out.good()) throw std::logic_error("scenario emitter: " + out.GetLastError());
    return std::string(out.c_str()) + "\n";
}

} // namespace ctxauth::scenario
