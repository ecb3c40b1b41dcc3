#include "ctxauth/patterns/broadcast.hpp"
#include "ctxauth/patterns/pubsub.hpp"
#include "ctxauth/patterns/request_response.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ctxauth::patterns {
namespace {

using authz::AuthState;
using authz::TransitionCause;
using context::make_signed_info;
using context::ObserverRegistry;
using context::RegistryView;
using context::TrustAnchor;

const ChannelId kNews{"news"};
const ChannelId kRadio{"radio"};
const ServiceId kArchive{"archive"};
const std::vector<SubjectId> kPeople{SubjectId{"ann"}, SubjectId{"ben"}, SubjectId{"cal"}};

// Each person has an observer "<name>_badge"; the person may act when their
// own badge reads true.
class World {
public:
    World() {
        reg.set_default_freshness(10'000'000);
        for (const auto& p : kPeople) {
            const ObserverId ob{p.str() + "_badge"};
            anchors.emplace(p, TrustAnchor{ob, context::to_bytes(p.str() + "-key")});
            reg.register_phi({PhiId{p.str() + "_in"}, ob, context::phi::eq(true), 0});
            reg.appear(ob, anchors.at(p), 0);
            reg.publish(make_signed_info(anchors.at(p), true, 0));
            engine.register_subject(p, p.str() + "-pw");
            for (const auto& [op, obj] : {std::pair{"subscribe", "news"}, {"listen", "radio"}, {"query", "archive"}}) {
                engine.add_condition({ConditionId{p.str() + "_" + op}, {PhiId{p.str() + "_in"}}, Target{op, obj},
                                      authz::SubjectScope::of({p})},
                                     reg);
            }
        }
    }
    void badge(const SubjectId& p, bool in, Ms t) { reg.publish(make_signed_info(anchors.at(p), in, t)); }
    RegistryView at(Ms t) const { return {reg, t}; }
    static std::string pw(const SubjectId& p) { return p.str() + "-pw"; }

    ObserverRegistry reg;
    authz::AuthzEngine engine;
    std::map<SubjectId, TrustAnchor> anchors;
};

void feed(PubSubBroker& b, const std::vector<Transition>& ts) {
    for (const auto& t : ts) b.on_transition(t);
}

TEST(PubSub, SubscribeOutcomes) {
    World w;
    SessionTable table(w.engine, AuthMode::Dynamic, 0);
    PubSubBroker broker(table);
    broker.add_channel(kNews, Target{"subscribe", "news"});
    const auto ok = broker.subscribe(kPeople[0], kNews, World::pw(kPeople[0]), w.at(1));
    EXPECT_TRUE(ok.granted());
    w.badge(kPeople[1], false, 1);
    const auto denied = broker.subscribe(kPeople[1], kNews, World::pw(kPeople[1]), w.at(1));
    EXPECT_FALSE(denied.granted());
    EXPECT_EQ(denied.denial, DenialReason::NotAuthorized);
    EXPECT_FALSE(broker.find(kPeople[1], kNews).has_value());
    EXPECT_EQ(broker.subscribe(kPeople[2], kNews, "wrong", w.at(1)).denial, DenialReason::BadCredential);
    EXPECT_EQ(broker.subscribe(SubjectId{"ghost"}, kNews, "x", w.at(1)).denial, DenialReason::UnknownSubject);
    EXPECT_THROW(broker.subscribe(kPeople[0], kNews, World::pw(kPeople[0]), w.at(2)), PatternError);
    EXPECT_THROW(broker.subscribe(kPeople[0], ChannelId{"nope"}, World::pw(kPeople[0]), w.at(2)), PatternError);
}

TEST(PubSub, DynamicRevocationFiltersDeliveries) {
    World w;
    SessionTable table(w.engine, AuthMode::Dynamic, 0);
    PubSubBroker broker(table);
    broker.add_channel(kNews, Target{"subscribe", "news"});
    for (const auto& p : kPeople) broker.subscribe(p, kNews, World::pw(p), w.at(1));
    EXPECT_EQ(broker.notify(kNews, "a", 2).size(), 3u);
    w.badge(kPeople[1], false, 3);
    feed(broker, table.on_context_event(w.at(3)));
    const auto d = broker.notify(kNews, "b", 3);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d[0].subscriber, kPeople[0]);
    EXPECT_EQ(d[1].subscriber, kPeople[2]);
    w.badge(kPeople[1], true, 4);
    feed(broker, table.on_context_event(w.at(4)));
    EXPECT_EQ(broker.notify(kNews, "c", 4).size(), 3u);
    // zone closed at the revocation and reopened at the re-grant
    std::vector<TrustedZoneRecord> bens;
    for (const auto& z : broker.zones())
        if (z.subscriber == kPeople[1]) bens.push_back(z);
    ASSERT_EQ(bens.size(), 2u);
    EXPECT_EQ(bens[0].kind, ZoneKind::ContextTrusted);
    EXPECT_EQ(bens[0].end, 3);
    EXPECT_EQ(bens[1].start, 4);
    EXPECT_FALSE(bens[1].end.has_value());
}

TEST(PubSub, QuasiStaticKeepsDeliveringUntilLeaseEnds) {
    World w;
    SessionTable table(w.engine, AuthMode::QuasiStatic, 60000);
    PubSubBroker broker(table);
    broker.add_channel(kNews, Target{"subscribe", "news"});
    broker.subscribe(kPeople[0], kNews, World::pw(kPeople[0]), w.at(0));
    w.badge(kPeople[0], false, 1000);
    feed(broker, table.on_context_event(w.at(1000)));
    EXPECT_EQ(broker.notify(kNews, "leak", 59999).size(), 1u);
    feed(broker, table.on_lease_tick(60000));
    EXPECT_TRUE(broker.notify(kNews, "x", 60000).empty());
    EXPECT_FALSE(broker.find(kPeople[0], kNews).has_value());
}

TEST(PubSub, RenewalRules) {
    World w;
    SessionTable table(w.engine, AuthMode::QuasiStatic, 60000);
    PubSubBroker broker(table);
    broker.add_channel(kNews, Target{"subscribe", "news"});
    for (const auto& p : kPeople) broker.subscribe(p, kNews, World::pw(p), w.at(0));

    const auto extended = broker.renew(kPeople[0], kNews, World::pw(kPeople[0]), w.at(59000));
    ASSERT_TRUE(extended.granted());
    EXPECT_FALSE(extended.fresh);
    EXPECT_EQ(extended.subscription->lease_expiry, 120000);

    w.badge(kPeople[1], false, 100);
    const auto ended = broker.renew(kPeople[1], kNews, World::pw(kPeople[1]), w.at(59000));
    EXPECT_FALSE(ended.granted());
    EXPECT_EQ(ended.denial, DenialReason::NotAuthorized);
    EXPECT_FALSE(broker.find(kPeople[1], kNews).has_value());

    const auto fresh = broker.renew(kPeople[2], kNews, World::pw(kPeople[2]), w.at(60000));
    ASSERT_TRUE(fresh.granted());
    EXPECT_TRUE(fresh.fresh);
    EXPECT_EQ(fresh.subscription->lease_expiry, 120000);
}

TEST(PubSub, StaticZonesCloseOnlyOnUnsubscribe) {
    World w;
    SessionTable table(w.engine, AuthMode::Static, 0);
    PubSubBroker broker(table);
    broker.add_channel(kNews, Target{"subscribe", "news"});
    broker.subscribe(kPeople[0], kNews, World::pw(kPeople[0]), w.at(0));
    w.badge(kPeople[0], false, 10);
    feed(broker, table.on_context_event(w.at(10)));
    EXPECT_EQ(broker.notify(kNews, "x", 20).size(), 1u);
    EXPECT_FALSE(broker.zones()[0].end.has_value());
    const auto off = broker.unsubscribe(kPeople[0], kNews, 30);
    ASSERT_TRUE(off);
    EXPECT_EQ(off->cause, TransitionCause::Logoff);
    EXPECT_EQ(broker.zones()[0].end, 30);
    EXPECT_THROW(broker.unsubscribe(kPeople[0], kNews, 31), PatternError);
}

TEST(RequestResponse, OutcomesUnderMidCallInvalidation) {
    for (auto mode : {AuthMode::Dynamic, AuthMode::QuasiStatic}) {
        World w;
        SessionTable table(w.engine, mode, 60000);
        RequestResponseService svc(table);
        svc.add_service(kArchive, Target{"query", "archive"});
        const auto r = svc.request(kPeople[0], kArchive, World::pw(kPeople[0]), 5000, w.at(0));
        ASSERT_TRUE(r.accepted);
        EXPECT_EQ(r.accepted->due(), 5000);
        w.badge(kPeople[0], false, 2000);
        std::vector<Reply> aborted;
        for (const auto& t : table.on_context_event(w.at(2000)))
            for (auto& reply : svc.on_transition(t)) aborted.push_back(reply);
        if (mode == AuthMode::Dynamic) {
            ASSERT_EQ(aborted.size(), 1u);
            EXPECT_EQ(aborted[0].kind, ReplyKind::AccessDenied);
            EXPECT_EQ(svc.get(1).status, RequestStatus::Aborted);
            EXPECT_THROW(svc.complete(1, w.at(5000)), ContractViolation);  // already finished
        } else {
            EXPECT_TRUE(aborted.empty());
            const auto reply = svc.complete(1, w.at(5000));
            EXPECT_EQ(reply.kind, ReplyKind::Response);
            EXPECT_TRUE(reply.leaked);
        }
    }
}

TEST(RequestResponse, UnchangedContextCompletes) {
    World w;
    SessionTable table(w.engine, AuthMode::Dynamic, 0);
    RequestResponseService svc(table);
    svc.add_service(kArchive, Target{"query", "archive"});
    svc.request(kPeople[0], kArchive, World::pw(kPeople[0]), 5000, w.at(0));
    const auto reply = svc.complete(1, w.at(5000));
    EXPECT_EQ(reply.kind, ReplyKind::Response);
    EXPECT_FALSE(reply.leaked);
    EXPECT_EQ(svc.get(1).status, RequestStatus::Completed);
    EXPECT_THROW(svc.request(kPeople[0], kArchive, World::pw(kPeople[0]), 0, w.at(1)), ContractViolation);
    EXPECT_THROW(svc.request(kPeople[0], ServiceId{"nope"}, World::pw(kPeople[0]), 1, w.at(1)), PatternError);
}

TEST(RequestResponse, RefusedOnArrival) {
    World w;
    SessionTable table(w.engine, AuthMode::Dynamic, 0);
    RequestResponseService svc(table);
    svc.add_service(kArchive, Target{"query", "archive"});
    w.badge(kPeople[0], false, 1);
    const auto r = svc.request(kPeople[0], kArchive, World::pw(kPeople[0]), 5000, w.at(1));
    EXPECT_FALSE(r.accepted);
    ASSERT_TRUE(r.denied);
    EXPECT_EQ(r.denied->kind, ReplyKind::AccessDenied);
    EXPECT_EQ(r.denied->session, 0u);
}

TEST(Seal, OpensOnlyWithTheSealingKey) {
    const SipSeal seal;
    const Bytes k1(16, 1);
    const Bytes k2(16, 2);
    const auto sealed = seal.seal(k1, 7, "ring ring");
    EXPECT_EQ(seal.open(k1, 7, sealed), "ring ring");
    EXPECT_FALSE(seal.open(k2, 7, sealed).has_value());
    EXPECT_FALSE(seal.open(k1, 8, sealed).has_value());
    auto flipped = sealed;
    flipped[0] ^= 1;
    EXPECT_FALSE(seal.open(k1, 7, flipped).has_value());
}

class BroadcastTest : public ::testing::Test {
protected:
    BroadcastTest() : table(w.engine, AuthMode::Dynamic, 0), bc(table, NodeId{"dispatch"}, 99) {
        bc.add_channel(kRadio, Target{"listen", "radio"});
    }
    std::optional<GroupKey> join(const SubjectId& p, Ms t) {
        return bc.register_interest(p, kRadio, World::pw(p), w.at(t)).key;
    }
    std::vector<Rotation> step(Ms t) {
        for (const auto& tr : table.on_context_event(w.at(t))) bc.on_transition(tr);
        return bc.flush();
    }

    World w;
    SessionTable table;
    BroadcastService bc;
};

TEST_F(BroadcastTest, AnnouncementCarriesNoSecrets) {
    const auto a = bc.announce(kRadio);
    EXPECT_EQ(a.channel, kRadio);
    EXPECT_EQ(a.producer, NodeId{"dispatch"});
    EXPECT_EQ(a.operation, "listen");
}

TEST_F(BroadcastTest, RegistrationHandsOutCurrentEpoch) {
    const auto k = join(kPeople[0], 1);
    ASSERT_TRUE(k);
    EXPECT_EQ(k->epoch, 1u);
    w.badge(kPeople[1], false, 1);
    EXPECT_FALSE(join(kPeople[1], 1).has_value());
    EXPECT_THROW(join(kPeople[0], 2), PatternError);
}

TEST_F(BroadcastTest, OnlyHoldersRecoverPlaintext) {
    const auto k0 = *join(kPeople[0], 1);
    const auto k1 = *join(kPeople[1], 1);
    const auto ct = bc.broadcast(kRadio, "all units");
    EXPECT_EQ(open_ciphertext(bc.seal(), k0, ct), "all units");
    EXPECT_EQ(open_ciphertext(bc.seal(), k1, ct), "all units");
    const GroupKey outsider{kRadio, 1, Bytes(16, 0)};
    EXPECT_FALSE(open_ciphertext(bc.seal(), outsider, ct).has_value());
}

TEST_F(BroadcastTest, RevocationRotatesToRemainingHolders) {
    for (const auto& p : kPeople) join(p, 1);
    const auto old_key = bc.current_key(kRadio);
    w.badge(kPeople[2], false, 5);
    const auto rot = step(5);
    ASSERT_EQ(rot.size(), 1u);
    EXPECT_EQ(rot[0].key.epoch, 2u);
    EXPECT_EQ(rot[0].recipients, (std::vector<SubjectId>{kPeople[0], kPeople[1]}));
    EXPECT_EQ(rot[0].excluded, (std::vector<SubjectId>{kPeople[2]}));
    const auto ct = bc.broadcast(kRadio, "after");
    EXPECT_FALSE(open_ciphertext(bc.seal(), old_key, ct).has_value());
    EXPECT_EQ(open_ciphertext(bc.seal(), rot[0].key, ct), "after");
}

TEST_F(BroadcastTest, TwoRevocationsInOneStepShareOneRotation) {
    for (const auto& p : kPeople) join(p, 1);
    w.badge(kPeople[0], false, 5);
    w.badge(kPeople[1], false, 5);
    const auto rot = step(5);
    ASSERT_EQ(rot.size(), 1u);
    EXPECT_EQ(rot[0].key.epoch, 2u);
    EXPECT_EQ(rot[0].excluded.size(), 2u);
    EXPECT_FALSE(bc.has_pending());
}

TEST_F(BroadcastTest, UnsubscribeDoesNotRotate) {
    for (const auto& p : kPeople) join(p, 1);
    bc.unregister(kPeople[1], kRadio, 5);
    EXPECT_FALSE(bc.has_pending());
    EXPECT_TRUE(bc.flush().empty());
    EXPECT_EQ(bc.current_key(kRadio).epoch, 1u);
    EXPECT_EQ(bc.holders(kRadio), (std::vector<SubjectId>{kPeople[0], kPeople[2]}));
}

TEST_F(BroadcastTest, RegrantedConsumerNeedsNewEpoch) {
    join(kPeople[0], 1);
    join(kPeople[1], 1);
    const auto held = *join(kPeople[2], 1);
    w.badge(kPeople[2], false, 5);
    ASSERT_EQ(step(5).size(), 1u);
    w.badge(kPeople[2], true, 6);
    EXPECT_TRUE(step(6).empty());
    const auto ct = bc.broadcast(kRadio, "x");
    EXPECT_FALSE(open_ciphertext(bc.seal(), held, ct).has_value());
    const auto fresh = join(kPeople[2], 7);
    ASSERT_TRUE(fresh);
    EXPECT_EQ(fresh->epoch, 2u);
    EXPECT_EQ(open_ciphertext(bc.seal(), *fresh, ct), "x");
}

TEST(Broadcast, LateRenewalRegrantIsNotExcluded) {
    World w;
    SessionTable table(w.engine, AuthMode::QuasiStatic, 1000);
    BroadcastService bc(table, NodeId{"dispatch"}, 1);
    bc.add_channel(kRadio, Target{"listen", "radio"});
    bc.register_interest(kPeople[0], kRadio, World::pw(kPeople[0]), w.at(0));
    bc.register_interest(kPeople[1], kRadio, World::pw(kPeople[1]), w.at(0));
    // the lease ran out before the renewal arrived; the subject is granted again at once
    const auto r = bc.renew(kPeople[0], kRadio, World::pw(kPeople[0]), w.at(1500));
    ASSERT_TRUE(r.key);
    EXPECT_EQ(r.key->epoch, 1u);
    EXPECT_FALSE(bc.has_pending());
    EXPECT_EQ(bc.holders(kRadio), (std::vector<SubjectId>{kPeople[0], kPeople[1]}));
}

TEST_F(BroadcastTest, ManualRotationNeedsHolders) {
    EXPECT_THROW(bc.rotate_group_key(kRadio, RotationCause::Manual), ContractViolation);
    join(kPeople[0], 1);
    const auto r = bc.rotate_group_key(kRadio, RotationCause::Manual);
    EXPECT_EQ(r.key.epoch, 2u);
    EXPECT_EQ(r.recipients, (std::vector<SubjectId>{kPeople[0]}));
}

} // namespace
} // namespace ctxauth::patterns
