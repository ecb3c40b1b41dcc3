#include "ctxauth/metrics/metrics.hpp"

#include <gtest/gtest.h>

namespace ctxauth::metrics {
namespace {

using sim::Detail;
using sim::Kind;
using sim::TraceRecord;

class TraceBuilder {
public:
    TraceBuilder& add(Ms t, Kind kind, Detail d, std::string from = "hub", std::string to = "pad") {
        records_.push_back({t, ++seq_, kind, std::move(from), std::move(to), std::move(d)});
        return *this;
    }
    TraceBuilder& transition(Ms t, int session, const char* from, const char* to, const char* cause) {
        return add(t, Kind::Transition,
                   {{"session", std::to_string(session)}, {"subject", "sam"}, {"target", "subscribe:feed"},
                    {"from", from}, {"to", to}, {"cause", cause}});
    }
    TraceBuilder& validity(Ms t, int session, bool valid, Ms injected, Ms t_obs, Ms t_comm, Ms t_phi) {
        return add(t, Kind::Validity,
                   {{"session", std::to_string(session)}, {"subject", "sam"}, {"target", "subscribe:feed"},
                    {"valid", valid ? "1" : "0"}, {"cause", "value"}, {"change", "1"}, {"inject", "1"},
                    {"injected", std::to_string(injected)}, {"t_obs", std::to_string(t_obs)},
                    {"t_comm", std::to_string(t_comm)}, {"t_phi", std::to_string(t_phi)}});
    }
    TraceBuilder& notify(Ms t, int session) {
        return add(t, Kind::Send, {{"msg", "Notify"}, {"session", std::to_string(session)}, {"subject", "sam"}});
    }
    Trace build() const { return Trace::from_records(records_); }

private:
    std::vector<TraceRecord> records_;
    std::uint64_t seq_ = 0;
};

TraceBuilder granted_session() {
    TraceBuilder b;
    b.transition(10, 1, "Unauthenticated", "Authenticated", "authentication");
    b.transition(10, 1, "Authenticated", "Authorized", "grant");
    b.validity(10, 1, true, 0, 0, 0, 0);
    return b;
}

TEST(Reaction, DynamicDecomposition) {
    auto b = granted_session();
    b.validity(107, 1, false, 100, 1, 3, 3).transition(107, 1, "Authorized", "Unauthorized", "context-revoked");
    const auto rt = compute_reaction_times(b.build());
    ASSERT_EQ(rt.size(), 1u);
    EXPECT_EQ(rt[0].total, 7);
    EXPECT_EQ(rt[0].t_lease_wait, 0);
    EXPECT_EQ(rt[0].t_observer + rt[0].t_comm + rt[0].t_phi + rt[0].t_lease_wait, rt[0].total);
}

TEST(Reaction, LeaseWaitIsTheRemainder) {
    auto b = granted_session();
    b.validity(1005, 1, false, 1000, 0, 5, 0).transition(60010, 1, "Authorized", "Unauthorized", "lease-expired");
    const auto rt = compute_reaction_times(b.build());
    ASSERT_EQ(rt.size(), 1u);
    EXPECT_EQ(rt[0].t_lease_wait, 59005);
    EXPECT_EQ(rt[0].total, 59010);
}

TEST(Reaction, LeaseLapseWithValidContextIsNotAReaction) {
    auto b = granted_session();
    b.transition(60010, 1, "Authorized", "Unauthorized", "lease-expired");
    EXPECT_TRUE(compute_reaction_times(b.build()).empty());
}

TEST(Reaction, UnmatchedContextRevocationIsAnError) {
    auto b = granted_session();
    b.transition(50, 1, "Authorized", "Unauthorized", "context-revoked");
    EXPECT_THROW(compute_reaction_times(b.build()), AnalysisError);
}

TEST(Reaction, LowerMedianAndMax) {
    std::vector<ReactionTime> r(4);
    r[0].total = 9;
    r[1].total = 1;
    r[2].total = 5;
    r[3].total = 7;
    EXPECT_EQ(median_total(r), 5);
    EXPECT_EQ(max_total(r), 9);
    EXPECT_EQ(median_total({}), 0);
}

TEST(Messages, CountsPerMode) {
    TraceBuilder b;
    b.add(100, Kind::Subscribe, {{"subject", "sam"}, {"channel", "feed"}});
    b.add(200, Kind::ContextUpdate, {{"observer", "badge"}});
    b.add(59000, Kind::Renew, {{"subject", "sam"}, {"channel", "feed"}, {"expiry", "60100"}});
    b.add(119000, Kind::Renew, {{"subject", "sam"}, {"channel", "feed"}, {"expiry", "120100"}});
    b.add(300, Kind::ObserverDisappear, {{"observer", "badge"}});
    const auto t = b.build();
    EXPECT_EQ(compute_message_counts(t, AuthMode::Static, 0, 120000).authorization_messages, 1u);
    const auto q = compute_message_counts(t, AuthMode::QuasiStatic, 0, 120000);
    EXPECT_EQ(q.renewals, 1u);  // the second renewal covers an expiry past the window
    EXPECT_EQ(q.authorization_messages, 2u);
    EXPECT_EQ(compute_message_counts(t, AuthMode::Dynamic, 0, 120000).authorization_messages, 3u);
    const auto empty = compute_message_counts(t, AuthMode::Dynamic, 400, 500);
    EXPECT_EQ(empty.authorization_messages, 0u);
}

TEST(Leaks, CountsSendsWhileAuthorizedAndInvalid) {
    auto b = granted_session();
    b.notify(100, 1);
    b.validity(1000, 1, false, 998, 0, 2, 0);
    for (Ms t = 5000; t <= 20000; t += 5000) b.notify(t, 1);
    b.transition(25000, 1, "Authorized", "Unauthorized", "renewal-denied");
    b.notify(30000, 1);
    const auto trace = b.build();
    const auto leaks = compute_leaks(trace);
    ASSERT_EQ(leaks.size(), 1u);
    EXPECT_EQ(leaks[0].leaked_deliveries, 4u);
    EXPECT_EQ(leaks[0].window_start, 1000);
    EXPECT_EQ(leaks[0].window_end, 25000);
    for (auto i : leaks[0].deliveries) {
        EXPECT_GT(i, leaks[0].start_index);
        EXPECT_LT(i, *leaks[0].end_index);
        EXPECT_GT(trace[i].t, leaks[0].window_start);
        EXPECT_LT(trace[i].t, *leaks[0].window_end);
    }
}

TEST(Leaks, DynamicRevocationInSameStepLeaksNothing) {
    auto b = granted_session();
    b.validity(1000, 1, false, 998, 0, 2, 0).transition(1000, 1, "Authorized", "Unauthorized", "context-revoked");
    b.notify(5000, 2);
    const auto leaks = compute_leaks(b.build());
    ASSERT_EQ(leaks.size(), 1u);
    EXPECT_EQ(leaks[0].leaked_deliveries, 0u);
}

TEST(Leaks, NoInvalidationNoWindows) {
    auto b = granted_session();
    b.notify(100, 1).notify(200, 1);
    EXPECT_TRUE(compute_leaks(b.build()).empty());
}

TEST(Invariants, FlagsDynamicLeakAndOrdering) {
    auto b = granted_session();
    b.validity(1000, 1, false, 998, 0, 2, 0);
    b.notify(1500, 1);
    b.transition(1600, 1, "Authorized", "Unauthorized", "context-revoked");
    const auto v = check_invariants(b.build(), {AuthMode::Dynamic, 0, 0, 2000});
    EXPECT_FALSE(v.empty());

    TraceBuilder unordered;
    unordered.add(10, Kind::Subscribe, {{"subject", "sam"}, {"channel", "feed"}});
    unordered.add(5, Kind::Subscribe, {{"subject", "sam"}, {"channel", "feed"}});
    EXPECT_FALSE(check_invariants(unordered.build(), {AuthMode::Dynamic, 0, 0, 20}).empty());
}

TEST(Invariants, StaticModeMustNotRevokeOnContext) {
    auto b = granted_session();
    b.validity(1000, 1, false, 998, 0, 2, 0).transition(1000, 1, "Authorized", "Unauthorized", "context-revoked");
    EXPECT_FALSE(check_invariants(b.build(), {AuthMode::Static, 0, 0, 2000}).empty());
    EXPECT_TRUE(check_invariants(b.build(), {AuthMode::Dynamic, 0, 0, 2000}).empty());
}

TEST(Invariants, DecryptWithoutKeyIsFlagged) {
    TraceBuilder b;
    b.add(10, Kind::Decrypt, {{"subject", "sam"}, {"channel", "radio"}, {"epoch", "1"}, {"held", "0"}, {"ok", "1"}});
    EXPECT_FALSE(check_invariants(b.build(), {AuthMode::Dynamic, 0, 0, 20}).empty());
}

TEST(Summary, KeyValueAndYaml) {
    auto b = granted_session();
    b.notify(100, 1);
    const auto s = summarize(b.build(), {"small", AuthMode::Dynamic, 60000, 3, 0, 200});
    EXPECT_EQ(s.deliveries, 1u);
    EXPECT_EQ(s.violations, 0u);
    const auto kv = to_key_value(s);
    EXPECT_NE(kv.find("scenario=small\n"), std::string::npos);
    EXPECT_NE(kv.find("deliveries=1\n"), std::string::npos);
    EXPECT_NE(to_yaml(s).find("scenario: \"small\""), std::string::npos);
}

} // namespace
} // namespace ctxauth::metrics
