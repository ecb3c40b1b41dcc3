#include "ctxauth/patterns/pubsub.hpp"

namespace ctxauth::patterns {

std::string_view to_string(ZoneKind kind) noexcept {
    return kind == ZoneKind::ContextTrusted ? "context-trusted" : "lease-trusted";
}

void PubSubBroker::add_channel(const ChannelId& channel, Target target) {
    if (!channels_.emplace(channel, std::move(target)).second) {
        throw PatternError(PatternError::Code::Duplicate, "channel '" + channel.str() + "' already exists");
    }
}

const Target& PubSubBroker::target(const ChannelId& channel) const {
    auto it = channels_.find(channel);
    if (it == channels_.end()) throw PatternError(PatternError::Code::UnknownChannel, "unknown channel '" + channel.str() + "'");
    return it->second;
}

Subscription PubSubBroker::snapshot(const Key& key, const Entry& e) const {
    const auto& s = sessions_.at(e.session);
    return Subscription{key.second, key.first, e.session, s.lease_expiry()};
}

void PubSubBroker::open_zone(const Key& key, Entry& e, Ms at) {
    const auto kind = sessions_.mode() == AuthMode::Dynamic ? ZoneKind::ContextTrusted : ZoneKind::LeaseTrusted;
    e.open_zone = zones_.size();
    zones_.push_back(TrustedZoneRecord{key.second, key.first, kind, at, std::nullopt});
}

void PubSubBroker::close_zone(Entry& e, Ms at) {
    if (!e.open_zone) return;
    zones_[*e.open_zone].end = at;
    e.open_zone.reset();
}

void PubSubBroker::end(std::map<Key, Entry>::iterator it, Ms at) {
    close_zone(it->second, at);
    sessions_.discard(it->second.session);
    subs_.erase(it);
}

SubscribeResult PubSubBroker::subscribe(const SubjectId& subscriber, const ChannelId& channel,
                                        std::string_view credential, const context::RegistryView& view) {
    const Target& tgt = target(channel);
    Key key{channel, subscriber};
    if (subs_.contains(key)) {
        throw PatternError(PatternError::Code::Duplicate,
                           "'" + subscriber.str() + "' is already subscribed to '" + channel.str() + "'");
    }
    auto admission = sessions_.admit(subscriber, tgt, credential, view);
    SubscribeResult out;
    out.transitions = std::move(admission.transitions);
    out.denial = admission.denial;
    if (!admission.granted()) return out;
    auto& e = subs_[key];
    e.session = *admission.session;
    open_zone(key, e, view.now);
    out.subscription = snapshot(key, e);
    return out;
}

std::vector<Delivery> PubSubBroker::notify(const ChannelId& channel, std::string payload, Ms now) {
    target(channel);
    std::vector<Delivery> out;
    for (auto it = subs_.lower_bound(Key{channel, SubjectId{}}); it != subs_.end() && it->first.first == channel; ++it) {
        if (!sessions_.at(it->second.session).authorized_at(now)) continue;
        out.push_back(Delivery{it->first.second, channel, it->second.session, next_message_++, payload});
    }
    return out;
}

SubscribeResult PubSubBroker::renew(const SubjectId& subscriber, const ChannelId& channel,
                                    std::string_view credential, const context::RegistryView& view) {
    if (sessions_.mode() != AuthMode::QuasiStatic) throw ContractViolation("renew applies to quasi-static mode only");
    target(channel);
    SubscribeResult out;
    Key key{channel, subscriber};
    if (auto it = subs_.find(key); it != subs_.end()) {
        auto& session = sessions_.at(it->second.session);
        if (session.authorized_at(view.now)) {
            if (!sessions_.engine().check_credential(subscriber, credential)) {
                if (auto t = sessions_.close(it->second.session, view.now)) out.transitions.push_back(*t);
                close_zone(it->second, view.now);
                subs_.erase(it);
                out.denial = DenialReason::BadCredential;
                return out;
            }
            auto r = sessions_.engine().renew(session, view);
            if (r.transition) out.transitions.push_back(*r.transition);
            if (r.granted) {
                close_zone(it->second, view.now);
                open_zone(key, it->second, view.now);
                out.subscription = snapshot(key, it->second);
            } else {
                end(it, view.now);
                out.denial = DenialReason::NotAuthorized;
            }
            return out;
        }
        // Expired lease whose tick has not been processed yet.
        if (auto t = sessions_.engine().on_lease_tick(session, view.now)) out.transitions.push_back(*t);
        end(it, view.now);
    }
    auto fresh = subscribe(subscriber, channel, credential, view);
    fresh.transitions.insert(fresh.transitions.begin(), out.transitions.begin(), out.transitions.end());
    fresh.fresh = true;
    return fresh;
}

std::optional<Transition> PubSubBroker::unsubscribe(const SubjectId& subscriber, const ChannelId& channel, Ms now) {
    auto it = subs_.find(Key{channel, subscriber});
    if (it == subs_.end()) {
        throw PatternError(PatternError::Code::NotSubscribed,
                           "'" + subscriber.str() + "' is not subscribed to '" + channel.str() + "'");
    }
    close_zone(it->second, now);
    auto t = sessions_.close(it->second.session, now);
    subs_.erase(it);
    return t;
}

void PubSubBroker::on_transition(const Transition& t) {
    for (auto it = subs_.begin(); it != subs_.end(); ++it) {
        if (it->second.session != t.session) continue;
        switch (t.cause) {
        case authz::TransitionCause::ContextRevoked: close_zone(it->second, t.at); break;
        case authz::TransitionCause::ContextRegranted: open_zone(it->first, it->second, t.at); break;
        case authz::TransitionCause::LeaseExpired:
        case authz::TransitionCause::RenewalDenied: end(it, t.at); break;
        default: break;
        }
        return;
    }
}

std::optional<Subscription> PubSubBroker::find(const SubjectId& subscriber, const ChannelId& channel) const {
    Key key{channel, subscriber};
    auto it = subs_.find(key);
    if (it == subs_.end()) return std::nullopt;
    return snapshot(key, it->second);
}

std::vector<Subscription> PubSubBroker::subscriptions() const {
    std::vector<Subscription> out;
    for (const auto& [key, e] : subs_) out.push_back(snapshot(key, e));
    return out;
}

} // namespace ctxauth::patterns
