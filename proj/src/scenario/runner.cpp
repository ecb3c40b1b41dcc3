#include "ctxauth/scenario/runner.hpp"

#include "ctxauth/patterns/broadcast.hpp"
#include "ctxauth/patterns/pubsub.hpp"
#include "ctxauth/patterns/request_response.hpp"
#include "ctxauth/sim/network.hpp"

#include <algorithm>

namespace ctxauth::scenario {

namespace {

using authz::AuthMode;
using authz::SessionId;
using authz::Transition;
using authz::TransitionCause;
using patterns::Reply;
using patterns::ReplyKind;
using sim::Detail;
using sim::Kind;
using sim::SimEvent;

// What made the context change, carried into the Validity records.
struct Cause {
    std::string kind;
    std::int64_t change = 0;
    std::int64_t inject = 0;
    Ms injected = 0;
    Ms t_obs = 0;
    Ms t_comm = 0;
    Ms t_phi = 0;
};

struct ClientLease {
    Ms expiry = 0;
    std::optional<sim::EventId> timer;
};

std::string join(const std::vector<SubjectId>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ';';
        out += id.str();
    }
    return out;
}

class World {
public:
    explicit World(const Scenario& sc);
    RunResult run();

private:
    using SubChannel = std::pair<SubjectId, ChannelId>;

    context::RegistryView view() const { return {registry_, sched_.now()}; }
    const NodeId& node_of(const SubjectId& s) const { return sc_.subject(s)->node; }
    std::string credential(const TimelineEntry& e) const {
        return e.credential ? *e.credential : sc_.subject(*e.subject)->secret;
    }

    void violation(const std::string& what);
    void schedule_timeline();
    void inject(const TimelineEntry& e, std::int64_t id);

    void publish(const ObserverId& o, const context::Value& v, bool tamper, Cause cause);
    void apply_update(const context::ObserverInfo& info, bool tamper, const Cause& cause);
    void context_changed(const Cause& cause);
    void check_active_phis();

    void handle(const std::vector<Transition>& transitions);
    void granted(SessionId id);
    void schedule_lease(SessionId id);
    std::optional<SessionId> session_for(const SubjectId& s, const ChannelId& c) const;
    void deny(const SubjectId& s, const char* key, const std::string& object, std::string_view reason);
    void client_lease(const SubjectId& s, const ChannelId& c, Ms expiry);
    void client_drop(const SubjectId& s, const ChannelId& c);

    void on_subscribe(const SubjectId& s, const ChannelId& c, const std::string& cred);
    void on_register(const SubjectId& s, const ChannelId& c, const std::string& cred);
    void on_renew(const SubjectId& s, const ChannelId& c, const std::string& cred);
    void on_unsubscribe(const SubjectId& s, const ChannelId& c);
    void on_request(const SubjectId& s, const ServiceId& svc, const std::string& cred, Ms duration);
    void send_reply(const Reply& r);
    void send_ack(const SubjectId& s, const ChannelId& c, SessionId session);
    void send_key(const SubjectId& s, const patterns::GroupKey& key, std::string_view cause, SessionId session);
    void notify(const ChannelId& c, const std::string& payload);
    void broadcast(const ChannelId& c, const std::string& payload);
    void rotate(const ChannelId& c);
    void distribute(const patterns::Rotation& r);

    const Scenario& sc_;
    const NodeId engine_node_;
    sim::Scheduler sched_;
    sim::Network net_;
    context::ObserverRegistry registry_;
    authz::AuthzEngine engine_;
    patterns::SessionTable table_;
    patterns::PubSubBroker pubsub_;
    patterns::RequestResponseService rr_;
    patterns::BroadcastService bc_;

    std::map<ObserverId, Ms> t_phi_;
    std::int64_t next_change_ = 1;
    std::map<SessionId, bool> valid_;
    std::map<SessionId, sim::EventId> lease_events_;
    std::map<std::uint64_t, sim::EventId> completions_;
    std::map<SubChannel, ClientLease> clients_;
    std::map<SubChannel, patterns::GroupKey> client_keys_;
    std::map<std::uint64_t, std::string> plaintexts_;
    std::vector<std::string> violations_;
};

World::World(const Scenario& sc)
    : sc_(sc),
      engine_node_(sc.engine),
      net_(sched_, sc.seed, sc.jitter),
      table_(engine_, sc.mode, sc.lease_ms),
      pubsub_(table_),
      rr_(table_),
      bc_(table_, sc.engine, sc.seed) {
    for (const auto& n : sc.nodes) net_.add_node(n);
    for (const auto& l : sc.links) net_.connect(l.from, l.to, l.latency_ms, l.hops);

    registry_.set_default_freshness(sc.default_freshness_ms);
    for (const auto& o : sc.observers) {
        if (o.freshness_ms) registry_.set_freshness(o.id, *o.freshness_ms);
        if (o.secret) registry_.add_anchor(context::TrustAnchor{o.id, context::to_bytes(*o.secret)});
        t_phi_[o.id] = 0;
    }
    for (const auto& p : sc.phis) {
        registry_.register_phi(p.phi);
        t_phi_[p.phi.observer] = std::max(t_phi_[p.phi.observer], p.phi.processing_ms);
    }
    for (const auto& s : sc.subjects) engine_.register_subject(s.id, s.secret);
    for (const auto& c : sc.conditions) engine_.add_condition(c.condition, registry_);
    for (const auto& c : sc.channels) {
        authz::Target target(c.operation, c.id.str());
        if (c.kind == ChannelKind::PubSub) pubsub_.add_channel(c.id, target);
        else bc_.add_channel(c.id, target);
    }
    for (const auto& s : sc.services) rr_.add_service(s.id, authz::Target(s.operation, s.id.str()));

    // Revocations handled while processing one event share one rotation.
    sched_.set_step_hook([this] {
        for (const auto& r : bc_.flush()) distribute(r);
    });
}

RunResult World::run() {
    schedule_timeline();
    sched_.run_until(sc_.duration_ms);
    return RunResult{sched_.trace(), sc_.duration_ms, violations_};
}

void World::violation(const std::string& what) {
    violations_.push_back("t=" + std::to_string(sched_.now()) + " " + what);
    sched_.annotate(Kind::Violation, engine_node_, engine_node_, Detail{{"what", what}});
}

void World::schedule_timeline() {
    struct Item {
        Ms at;
        std::size_t index;
    };
    std::vector<Item> items;
    for (std::size_t i = 0; i < sc_.timeline.size(); ++i) {
        const auto& e = sc_.timeline[i];
        if (!e.repeat) {
            items.push_back({e.at, i});
            continue;
        }
        for (Ms t = e.at; t <= e.repeat->until; t += e.repeat->every) items.push_back({t, i});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.at < b.at; });

    std::int64_t id = 1;
    for (const auto& item : items) {
        const auto& e = sc_.timeline[item.index];
        NodeId origin = engine_node_;
        if (e.observer) origin = sc_.observer(*e.observer)->node;
        else if (e.subject) origin = node_of(*e.subject);
        Detail d;
        d.add("do", std::string(to_string(e.action))).add("inject", id);
        if (e.observer) d.add("observer", e.observer->str());
        if (e.value) d.add("value", context::typed_value(*e.value));
        if (e.tamper) d.add("tamper", 1);
        if (e.subject) d.add("subject", e.subject->str());
        if (e.channel) d.add("channel", e.channel->str());
        if (e.service) d.add("service", e.service->str());
        if (e.duration) d.add("duration", e.duration);
        const std::int64_t inject_id = id++;
        sched_.schedule(item.at, Kind::Inject, origin, origin, std::move(d),
                        [this, &e, inject_id](const SimEvent&) { inject(e, inject_id); });
    }
}

void World::inject(const TimelineEntry& e, std::int64_t id) {
    const Ms now = sched_.now();
    switch (e.action) {
    case Action::Value: {
        const auto& o = *sc_.observer(*e.observer);
        Cause cause{"value", next_change_++, id, now, o.sense_delay_ms, 0, 0};
        if (o.sense_delay_ms == 0) {
            publish(o.id, *e.value, e.tamper, cause);
        } else {
            Detail d{{"what", "publish"}, {"observer", o.id.str()}};
            d.add("change", cause.change);
            sched_.schedule(now + o.sense_delay_ms, Kind::Timer, o.node, o.node, std::move(d),
                            [this, &e, cause](const SimEvent&) { publish(*e.observer, *e.value, e.tamper, cause); });
        }
        break;
    }
    case Action::Appear:
    case Action::Disappear: {
        const auto& o = *sc_.observer(*e.observer);
        const bool appear = e.action == Action::Appear;
        Detail d{{"observer", o.id.str()}};
        d.add("inject", id);
        net_.send(o.node, engine_node_, appear ? Kind::ObserverAppear : Kind::ObserverDisappear, std::move(d),
                  [this, appear, obs = o.id, id, now](const SimEvent& ev) {
                      if (appear) registry_.appear(obs, std::nullopt, ev.due);
                      else registry_.disappear(obs, ev.due);
                      check_active_phis();
                      const Ms comm = ev.due - ev.detail.int_at("sent");
                      context_changed(Cause{appear ? "appear" : "disappear", next_change_++, id, now, 0, comm, 0});
                  });
        break;
    }
    case Action::Subscribe:
    case Action::Register: {
        const bool reg = e.action == Action::Register;
        Detail d{{"subject", e.subject->str()}, {"channel", e.channel->str()}};
        net_.send(node_of(*e.subject), engine_node_, reg ? Kind::RegisterInterest : Kind::Subscribe, std::move(d),
                  [this, reg, s = *e.subject, c = *e.channel, cred = credential(e)](const SimEvent&) {
                      if (reg) on_register(s, c, cred);
                      else on_subscribe(s, c, cred);
                  });
        break;
    }
    case Action::Unsubscribe: {
        client_drop(*e.subject, *e.channel);
        Detail d{{"subject", e.subject->str()}, {"channel", e.channel->str()}};
        net_.send(node_of(*e.subject), engine_node_, Kind::Unsubscribe, std::move(d),
                  [this, s = *e.subject, c = *e.channel](const SimEvent&) { on_unsubscribe(s, c); });
        break;
    }
    case Action::Request: {
        Detail d{{"subject", e.subject->str()}, {"service", e.service->str()}};
        d.add("duration", e.duration);
        net_.send(node_of(*e.subject), engine_node_, Kind::Request, std::move(d),
                  [this, s = *e.subject, svc = *e.service, cred = credential(e), dur = e.duration](const SimEvent&) {
                      on_request(s, svc, cred, dur);
                  });
        break;
    }
    case Action::Notify: notify(*e.channel, e.payload.value_or("")); break;
    case Action::Broadcast: broadcast(*e.channel, e.payload.value_or("")); break;
    case Action::Rotate: rotate(*e.channel); break;
    case Action::Announce: {
        const auto a = bc_.announce(*e.channel);
        for (const auto& n : net_.neighbours(engine_node_)) {
            net_.send(engine_node_, n, Kind::BroadcastAnnounce,
                      Detail{{"channel", a.channel.str()}, {"producer", a.producer.str()}, {"operation", a.operation}},
                      nullptr);
        }
        break;
    }
    }
}

// ---------------------------------------------------------------------------
// context

void World::publish(const ObserverId& o, const context::Value& v, bool tamper, Cause cause) {
    const auto& spec = *sc_.observer(o);
    const Ms ts = sched_.now();
    context::ObserverInfo info{o, v, ts, ""};
    if (spec.secret) {
        // A tampered reading carries a tag made without the shared secret.
        const std::string secret = tamper ? *spec.secret + "#forged" : *spec.secret;
        info.auth_tag = context::compute_auth_tag(o, v, ts, context::to_bytes(secret));
    }
    Detail d{{"observer", o.str()}, {"value", context::typed_value(v)}};
    d.add("ts", ts).add("change", cause.change).add("inject", cause.inject).add("t_obs", cause.t_obs);
    net_.send(spec.node, engine_node_, Kind::ContextUpdate, std::move(d),
              [this, info, tamper, cause](const SimEvent& ev) mutable {
                  cause.t_comm = ev.due - ev.detail.int_at("sent");
                  cause.t_phi = t_phi_.at(info.observer);
                  if (cause.t_phi == 0) {
                      apply_update(info, tamper, cause);
                      return;
                  }
                  Detail t{{"what", "phi"}, {"observer", info.observer.str()}};
                  t.add("change", cause.change);
                  sched_.schedule(ev.due + cause.t_phi, Kind::Timer, engine_node_, engine_node_, std::move(t),
                                  [this, info, tamper, cause](const SimEvent&) { apply_update(info, tamper, cause); });
              });
}

void World::apply_update(const context::ObserverInfo& info, bool tamper, const Cause& cause) {
    const auto& spec = *sc_.observer(info.observer);
    if (!registry_.is_present(info.observer)) {
        // Observer left while the reading was in flight.
        return;
    }
    registry_.publish(info);
    const bool expected = spec.secret.has_value() && !tamper;
    if (registry_.latest(info.observer)->authentic != expected) {
        violation("authenticity verdict for '" + info.observer.str() + "' change " + std::to_string(cause.change) +
                  " is " + (expected ? "false" : "true"));
    }
    const Ms ts = info.timestamp;
    const Ms deadline = ts + registry_.freshness(info.observer) + 1;
    if (deadline > sched_.now()) {
        Detail d{{"what", "freshness"}, {"observer", info.observer.str()}};
        d.add("ts", ts);
        sched_.schedule(deadline, Kind::Timer, engine_node_, engine_node_, std::move(d),
                        [this, obs = info.observer, ts](const SimEvent& ev) {
                            const auto* latest = registry_.latest(obs);
                            if (!latest || latest->info.timestamp != ts) return;
                            context_changed(Cause{"freshness", next_change_++, 0, ev.due, 0, 0, 0});
                        });
    }
    context_changed(cause);
}

void World::check_active_phis() {
    if (registry_.active_phis() != registry_.recompute_active_phis()) {
        violation("active phi set diverged from observer presence");
    }
}

void World::context_changed(const Cause& c) {
    const auto v = view();
    for (const auto& [id, session] : table_.sessions()) {
        auto it = valid_.find(id);
        if (it == valid_.end()) continue;
        const bool now_valid = table_.context_valid(id, v);
        if (now_valid == it->second) continue;
        it->second = now_valid;
        Detail d;
        d.add("session", static_cast<std::int64_t>(id))
            .add("subject", session.subject().str())
            .add("target", session.target().str())
            .add("valid", now_valid ? 1 : 0)
            .add("cause", c.kind)
            .add("change", c.change)
            .add("inject", c.inject)
            .add("injected", c.injected)
            .add("t_obs", c.t_obs)
            .add("t_comm", c.t_comm)
            .add("t_phi", c.t_phi);
        sched_.annotate(Kind::Validity, engine_node_, node_of(session.subject()), std::move(d));
    }
    handle(table_.on_context_event(v));
}

// ---------------------------------------------------------------------------
// sessions

void World::handle(const std::vector<Transition>& transitions) {
    for (const auto& t : transitions) {
        Detail d;
        d.add("session", static_cast<std::int64_t>(t.session))
            .add("subject", t.subject.str())
            .add("target", t.target.str())
            .add("from", std::string(authz::to_string(t.from)))
            .add("to", std::string(authz::to_string(t.to)))
            .add("cause", std::string(authz::to_string(t.cause)));
        sched_.annotate(Kind::Transition, engine_node_, node_of(t.subject), std::move(d));

        if (t.cause == TransitionCause::Grant) granted(t.session);
        if (t.is_revocation()) {
            if (auto it = lease_events_.find(t.session); it != lease_events_.end()) {
                sched_.cancel(it->second);
                lease_events_.erase(it);
            }
        }
        pubsub_.on_transition(t);
        for (const auto& reply : rr_.on_transition(t)) {
            if (auto it = completions_.find(reply.request); it != completions_.end()) {
                sched_.cancel(it->second);
                completions_.erase(it);
            }
            send_reply(reply);
        }
        bc_.on_transition(t);
        if (!table_.contains(t.session)) {
            valid_.erase(t.session);
            if (auto it = lease_events_.find(t.session); it != lease_events_.end()) {
                sched_.cancel(it->second);
                lease_events_.erase(it);
            }
        }
    }
}

// A grant implies a valid context at that instant.
void World::granted(SessionId id) {
    if (!table_.contains(id)) return;
    const auto& s = table_.at(id);
    valid_[id] = true;
    Detail d;
    d.add("session", static_cast<std::int64_t>(id))
        .add("subject", s.subject().str())
        .add("target", s.target().str())
        .add("valid", 1)
        .add("cause", "grant");
    sched_.annotate(Kind::Validity, engine_node_, node_of(s.subject()), std::move(d));
    schedule_lease(id);
}

void World::schedule_lease(SessionId id) {
    if (sc_.mode != AuthMode::QuasiStatic || !table_.contains(id)) return;
    const auto& s = table_.at(id);
    if (auto it = lease_events_.find(id); it != lease_events_.end()) sched_.cancel(it->second);
    Detail d;
    d.add("session", static_cast<std::int64_t>(id)).add("subject", s.subject().str());
    lease_events_[id] = sched_.schedule(*s.lease_expiry(), Kind::LeaseExpiry, engine_node_, engine_node_, std::move(d),
                                        [this, id](const SimEvent& ev) {
                                            lease_events_.erase(id);
                                            if (!table_.contains(id)) return;
                                            auto t = engine_.on_lease_tick(table_.at(id), ev.due);
                                            if (t) handle({*t});
                                        });
}

std::optional<SessionId> World::session_for(const SubjectId& s, const ChannelId& c) const {
    const authz::Target target(sc_.channel(c)->operation, c.str());
    for (const auto& [id, sess] : table_.sessions()) {
        if (sess.subject() == s && sess.target() == target) return id;
    }
    return std::nullopt;
}

void World::deny(const SubjectId& s, const char* key, const std::string& object, std::string_view reason) {
    Detail d{{"subject", s.str()}, {key, object}, {"reason", std::string(reason)}};
    sched_.annotate(Kind::Send, engine_node_, node_of(s),
                    Detail{{"msg", "AccessDenied"}, {"subject", s.str()}, {key, object}, {"reason", std::string(reason)}});
    const bool channel = std::string_view(key) == "channel";
    net_.send(engine_node_, node_of(s), Kind::AccessDenied, std::move(d),
              [this, s, channel, object](const SimEvent&) {
                  if (channel) client_drop(s, ChannelId(object));
              });
}

void World::client_lease(const SubjectId& s, const ChannelId& c, Ms expiry) {
    auto& lease = clients_[{s, c}];
    if (lease.timer) sched_.cancel(*lease.timer);
    lease.expiry = expiry;
    const Ms at = std::max(sched_.now(), expiry - sc_.renew_lead_ms);
    Detail d{{"what", "renew"}, {"subject", s.str()}, {"channel", c.str()}};
    d.add("expiry", expiry);
    const NodeId& node = node_of(s);
    lease.timer = sched_.schedule(at, Kind::Timer, node, node, std::move(d), [this, s, c, expiry](const SimEvent&) {
        auto it = clients_.find({s, c});
        if (it == clients_.end() || it->second.expiry != expiry) return;
        it->second.timer.reset();
        Detail r{{"subject", s.str()}, {"channel", c.str()}};
        r.add("expiry", expiry);
        net_.send(node_of(s), engine_node_, Kind::Renew, std::move(r),
                  [this, s, c](const SimEvent&) { on_renew(s, c, sc_.subject(s)->secret); });
    });
}

void World::client_drop(const SubjectId& s, const ChannelId& c) {
    auto it = clients_.find({s, c});
    if (it == clients_.end()) return;
    if (it->second.timer) sched_.cancel(*it->second.timer);
    clients_.erase(it);
}

// ---------------------------------------------------------------------------
// patterns

void World::send_ack(const SubjectId& s, const ChannelId& c, SessionId session) {
    Detail d{{"subject", s.str()}, {"channel", c.str()}};
    d.add("session", static_cast<std::int64_t>(session));
    std::optional<Ms> expiry;
    if (table_.contains(session)) expiry = table_.at(session).lease_expiry();
    if (expiry) d.add("expiry", *expiry);
    net_.send(engine_node_, node_of(s), Kind::SubscribeAck, std::move(d), [this, s, c, expiry](const SimEvent&) {
        if (expiry) client_lease(s, c, *expiry);
    });
}

void World::on_subscribe(const SubjectId& s, const ChannelId& c, const std::string& cred) {
    patterns::SubscribeResult r;
    try {
        r = pubsub_.subscribe(s, c, cred, view());
    } catch (const patterns::PatternError&) {
        deny(s, "channel", c.str(), "duplicate");
        return;
    }
    handle(r.transitions);
    if (r.granted()) send_ack(s, c, r.subscription->session);
    else deny(s, "channel", c.str(), patterns::to_string(*r.denial));
}

void World::on_register(const SubjectId& s, const ChannelId& c, const std::string& cred) {
    patterns::RegistrationResult r;
    try {
        r = bc_.register_interest(s, c, cred, view());
    } catch (const patterns::PatternError&) {
        deny(s, "channel", c.str(), "duplicate");
        return;
    }
    handle(r.transitions);
    if (!r.key) {
        deny(s, "channel", c.str(), patterns::to_string(*r.denial));
        return;
    }
    send_key(s, *r.key, "register", session_for(s, c).value_or(0));
}

void World::on_renew(const SubjectId& s, const ChannelId& c, const std::string& cred) {
    std::optional<SessionId> id;
    if (sc_.channel(c)->kind == ChannelKind::Broadcast) {
        auto r = bc_.renew(s, c, cred, view());
        handle(r.transitions);
        if (r.key) id = session_for(s, c);
        else deny(s, "channel", c.str(), patterns::to_string(*r.denial));
    } else {
        auto r = pubsub_.renew(s, c, cred, view());
        handle(r.transitions);
        if (r.granted()) id = r.subscription->session;
        else deny(s, "channel", c.str(), patterns::to_string(*r.denial));
    }
    if (!id) return;
    schedule_lease(*id);
    send_ack(s, c, *id);
}

void World::on_unsubscribe(const SubjectId& s, const ChannelId& c) {
    std::optional<Transition> t;
    try {
        if (sc_.channel(c)->kind == ChannelKind::Broadcast) t = bc_.unregister(s, c, sched_.now());
        else t = pubsub_.unsubscribe(s, c, sched_.now());
    } catch (const patterns::PatternError&) {
        return;
    }
    if (t) handle({*t});
}

void World::on_request(const SubjectId& s, const ServiceId& svc, const std::string& cred, Ms duration) {
    auto r = rr_.request(s, svc, cred, duration, view());
    handle(r.transitions);
    if (r.denied) {
        send_reply(*r.denied);
        return;
    }
    const auto id = r.accepted->id;
    Detail d{{"what", "complete"}, {"service", svc.str()}};
    d.add("request", static_cast<std::int64_t>(id));
    completions_[id] = sched_.schedule(r.accepted->due(), Kind::Timer, engine_node_, engine_node_, std::move(d),
                                       [this, id](const SimEvent&) {
                                           completions_.erase(id);
                                           send_reply(rr_.complete(id, view()));
                                       });
}

void World::send_reply(const Reply& r) {
    const bool response = r.kind == ReplyKind::Response;
    Detail s{{"msg", response ? "Response" : "AccessDenied"}};
    s.add("request", static_cast<std::int64_t>(r.request))
        .add("session", static_cast<std::int64_t>(r.session))
        .add("subject", r.consumer.str())
        .add("service", r.producer.str());
    if (response) s.add("leaked", r.leaked ? 1 : 0);
    sched_.annotate(Kind::Send, engine_node_, node_of(r.consumer), std::move(s));
    Detail d{{"subject", r.consumer.str()}, {"service", r.producer.str()}};
    d.add("request", static_cast<std::int64_t>(r.request));
    net_.send(engine_node_, node_of(r.consumer), response ? Kind::Response : Kind::AccessDenied, std::move(d), nullptr);
}

void World::send_key(const SubjectId& s, const patterns::GroupKey& key, std::string_view cause, SessionId session) {
    Detail d{{"subject", s.str()}, {"channel", key.channel.str()}};
    d.add("epoch", static_cast<std::int64_t>(key.epoch)).add("cause", std::string(cause));
    std::optional<Ms> expiry;
    if (cause == "register" && table_.contains(session)) expiry = table_.at(session).lease_expiry();
    if (expiry) d.add("expiry", *expiry);
    net_.send(engine_node_, node_of(s), Kind::RekeyDistribute, std::move(d), [this, s, key, expiry](const SimEvent&) {
        auto& held = client_keys_[{s, key.channel}];
        if (held.epoch < key.epoch) held = key;
        if (expiry) client_lease(s, key.channel, *expiry);
    });
}

void World::notify(const ChannelId& c, const std::string& payload) {
    for (const auto& del : pubsub_.notify(c, payload, sched_.now())) {
        Detail s{{"msg", "Notify"}};
        s.add("message", static_cast<std::int64_t>(del.message))
            .add("session", static_cast<std::int64_t>(del.session))
            .add("subject", del.subscriber.str())
            .add("channel", c.str());
        sched_.annotate(Kind::Send, engine_node_, node_of(del.subscriber), std::move(s));
        Detail d{{"subject", del.subscriber.str()}, {"channel", c.str()}};
        d.add("message", static_cast<std::int64_t>(del.message))
            .add("session", static_cast<std::int64_t>(del.session))
            .add("bytes", static_cast<std::int64_t>(del.payload.size()));
        net_.send(engine_node_, node_of(del.subscriber), Kind::Notify, std::move(d), nullptr);
    }
}

void World::broadcast(const ChannelId& c, const std::string& payload) {
    const auto ct = bc_.broadcast(c, payload);
    plaintexts_[ct.message] = payload;
    Detail s{{"msg", "BroadcastCipher"}, {"channel", c.str()}};
    s.add("epoch", static_cast<std::int64_t>(ct.epoch)).add("message", static_cast<std::int64_t>(ct.message));
    sched_.annotate(Kind::Send, engine_node_, engine_node_, std::move(s));
    for (const auto& n : net_.neighbours(engine_node_)) {
        Detail d{{"channel", c.str()}};
        d.add("epoch", static_cast<std::int64_t>(ct.epoch)).add("message", static_cast<std::int64_t>(ct.message));
        net_.send(engine_node_, n, Kind::BroadcastCipher, std::move(d), [this, ct, n](const SimEvent&) {
            for (const auto& subj : sc_.subjects) {
                if (subj.node != n) continue;
                auto it = client_keys_.find({subj.id, ct.channel});
                std::optional<std::string> plain;
                std::int64_t held = 0;
                if (it != client_keys_.end()) {
                    held = static_cast<std::int64_t>(it->second.epoch);
                    plain = patterns::open_ciphertext(bc_.seal(), it->second, ct);
                }
                const bool ok = plain.has_value();
                if (ok && *plain != plaintexts_.at(ct.message)) violation("decryption produced a different payload");
                Detail d{{"subject", subj.id.str()}, {"channel", ct.channel.str()}};
                d.add("epoch", static_cast<std::int64_t>(ct.epoch)).add("held", held).add("ok", ok ? 1 : 0);
                sched_.annotate(Kind::Decrypt, n, n, std::move(d));
            }
        });
    }
}

void World::rotate(const ChannelId& c) {
    if (bc_.holders(c).empty()) return;
    distribute(bc_.rotate_group_key(c, patterns::RotationCause::Manual));
}

void World::distribute(const patterns::Rotation& r) {
    Detail d{{"channel", r.key.channel.str()}};
    d.add("epoch", static_cast<std::int64_t>(r.key.epoch))
        .add("cause", std::string(patterns::to_string(r.cause)))
        .add("recipients", join(r.recipients))
        .add("excluded", join(r.excluded));
    sched_.annotate(Kind::Rotate, engine_node_, engine_node_, std::move(d));
    for (const auto& s : r.recipients) send_key(s, r.key, "rotation", 0);
}

} // namespace

RunResult run(const Scenario& scenario) {
    validate(scenario);
    World world(scenario);
    return world.run();
}

} // namespace ctxauth::scenario
