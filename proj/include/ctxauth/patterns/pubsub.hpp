#pragma once

#include "ctxauth/patterns/sessions.hpp"

namespace ctxauth::patterns {

enum class ZoneKind { LeaseTrusted, ContextTrusted };
std::string_view to_string(ZoneKind kind) noexcept;

// Interval during which the producer trusts a subscriber. Static mode records
// a lease-trusted zone that only closes on unsubscribe.
struct TrustedZoneRecord {
    SubjectId subscriber;
    ChannelId channel;
    ZoneKind kind = ZoneKind::LeaseTrusted;
    Ms start = 0;
    std::optional<Ms> end;

    bool operator==(const TrustedZoneRecord&) const = default;
};

struct Subscription {
    SubjectId subscriber;
    ChannelId channel;
    SessionId session = 0;
    std::optional<Ms> lease_expiry;
};

struct SubscribeResult {
    std::optional<Subscription> subscription;
    std::optional<DenialReason> denial;
    std::vector<Transition> transitions;
    bool fresh = false;  // a renewal that went through the subscribe path

    bool granted() const { return subscription.has_value(); }
};

struct Delivery {
    SubjectId subscriber;
    ChannelId channel;
    SessionId session = 0;
    std::uint64_t message = 0;
    std::string payload;
};

class PubSubBroker {
public:
    explicit PubSubBroker(SessionTable& sessions) : sessions_(sessions) {}

    void add_channel(const ChannelId& channel, Target target);
    bool has_channel(const ChannelId& channel) const { return channels_.contains(channel); }
    const Target& target(const ChannelId& channel) const;

    // Throws PatternError for unknown channels and duplicate subscriptions.
    SubscribeResult subscribe(const SubjectId& subscriber, const ChannelId& channel, std::string_view credential,
                              const context::RegistryView& view);

    // One delivery per subscription whose session is authorized at `now`,
    // ordered by subscriber.
    std::vector<Delivery> notify(const ChannelId& channel, std::string payload, Ms now);

    // QuasiStatic only. Before expiry: full re-authorization, extending the
    // lease or ending the subscription. At or after expiry, or with no live
    // subscription: the subscribe path.
    SubscribeResult renew(const SubjectId& subscriber, const ChannelId& channel, std::string_view credential,
                          const context::RegistryView& view);

    std::optional<Transition> unsubscribe(const SubjectId& subscriber, const ChannelId& channel, Ms now);

    // Feed every session transition here. Quasi-static revocations end the
    // subscription; dynamic ones only suspend delivery.
    void on_transition(const Transition& transition);

    std::optional<Subscription> find(const SubjectId& subscriber, const ChannelId& channel) const;
    std::vector<Subscription> subscriptions() const;
    const std::vector<TrustedZoneRecord>& zones() const noexcept { return zones_; }

private:
    using Key = std::pair<ChannelId, SubjectId>;
    struct Entry {
        SessionId session = 0;
        std::optional<std::size_t> open_zone;
    };

    Subscription snapshot(const Key& key, const Entry& e) const;
    void open_zone(const Key& key, Entry& e, Ms at);
    void close_zone(Entry& e, Ms at);
    void end(std::map<Key, Entry>::iterator it, Ms at);

    SessionTable& sessions_;
    std::map<ChannelId, Target> channels_;
    std::map<Key, Entry> subs_;
    std::vector<TrustedZoneRecord> zones_;
    std::uint64_t next_message_ = 1;
};

} // namespace ctxauth::patterns
