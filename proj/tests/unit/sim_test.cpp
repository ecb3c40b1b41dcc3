#include "ctxauth/sim/network.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ctxauth::sim {
namespace {

const NodeId kA{"a"};
const NodeId kB{"b"};

Handler noop() {
    return [](const SimEvent&) {};
}

TEST(Detail, EscapesSeparatorsAndRoundTrips) {
    Detail d;
    d.add("payload", "a,b=c d%e");
    d.add("n", std::int64_t{-42});
    const auto text = d.render();
    EXPECT_EQ(text.find(' '), std::string::npos);
    EXPECT_EQ(Detail::parse(text), d);
    EXPECT_EQ(Detail::parse(text).at("payload"), "a,b=c d%e");
    EXPECT_EQ(Detail::parse(text).int_at("n"), -42);
}

TEST(TraceRecord, LineRoundTrip) {
    TraceRecord r{120, 7, Kind::Notify, "broker", "phone", Detail{{"channel", "news"}, {"message", "3"}}};
    const auto line = r.to_line();
    EXPECT_EQ(line, "t=120 seq=7 kind=Notify from=broker to=phone detail=channel=news,message=3");
    EXPECT_EQ(TraceRecord::parse_line(line), r);
}

TEST(TraceRecord, RejectsMalformedLines) {
    EXPECT_THROW(TraceRecord::parse_line("t=1 seq=2 kind=Bogus from=a to=b detail="), TraceParseError);
    EXPECT_THROW(TraceRecord::parse_line("seq=2 t=1 kind=Notify from=a to=b detail="), TraceParseError);
}

TEST(Kind, NamesRoundTrip) {
    for (int k = 0; k <= static_cast<int>(Kind::Violation); ++k) {
        const auto kind = static_cast<Kind>(k);
        EXPECT_EQ(parse_kind(to_string(kind)), kind);
    }
    EXPECT_TRUE(is_annotation(Kind::Transition));
    EXPECT_FALSE(is_annotation(Kind::Notify));
}

TEST(Scheduler, SameDueRunsInInsertionOrder) {
    Scheduler s;
    std::vector<int> order;
    s.schedule(10, Kind::Timer, kA, kA, {}, [&](const SimEvent&) { order.push_back(1); });
    s.schedule(10, Kind::Timer, kA, kA, {}, [&](const SimEvent&) { order.push_back(2); });
    s.schedule(5, Kind::Timer, kA, kA, {}, [&](const SimEvent&) { order.push_back(0); });
    s.run_until(10);
    EXPECT_EQ(order, (std::vector<int>{0, 1, 2}));
}

TEST(Scheduler, ScheduleAtNowRunsThisStepAfterEarlierSeq) {
    Scheduler s;
    std::vector<int> order;
    s.schedule(10, Kind::Timer, kA, kA, {}, [&](const SimEvent&) {
        order.push_back(1);
        s.schedule(s.now(), Kind::Timer, kA, kA, {}, [&](const SimEvent&) { order.push_back(3); });
    });
    s.schedule(10, Kind::Timer, kA, kA, {}, [&](const SimEvent&) { order.push_back(2); });
    s.run_until(10);
    EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(s.pending(), 0u);
}

TEST(Scheduler, PastDueIsAnError) {
    Scheduler s;
    s.run_until(100);
    EXPECT_THROW(s.schedule(99, Kind::Timer, kA, kA, {}, noop()), SchedulerError);
}

TEST(Scheduler, EmptyQueueAdvancesClock) {
    Scheduler s;
    EXPECT_TRUE(s.run_until(500).empty());
    EXPECT_EQ(s.now(), 500);
}

TEST(Scheduler, CancelledEventsDoNotRun) {
    Scheduler s;
    bool ran = false;
    const auto id = s.schedule(10, Kind::Timer, kA, kA, {}, [&](const SimEvent&) { ran = true; });
    EXPECT_TRUE(s.cancel(id));
    EXPECT_FALSE(s.cancel(id));
    s.run_until(20);
    EXPECT_FALSE(ran);
}

TEST(Scheduler, AnnotationsFollowTheirEvent) {
    Scheduler s;
    s.schedule(3, Kind::Timer, kA, kB, {}, [&](const SimEvent&) { s.annotate(Kind::Violation, kA, kB, {{"what", "x"}}); });
    s.run_until(3);
    ASSERT_EQ(s.trace().size(), 2u);
    EXPECT_EQ(s.trace()[0].kind, Kind::Timer);
    EXPECT_EQ(s.trace()[1].kind, Kind::Violation);
    EXPECT_EQ(s.trace()[1].seq, s.trace()[0].seq);
    EXPECT_EQ(s.trace()[1].t, 3);
}

// A chain of self-rescheduling timers with pseudo-random gaps.
std::string chain_trace(const std::vector<Ms>& stops) {
    Scheduler s;
    std::mt19937_64 gen(3);
    std::function<void(const SimEvent&)> step = [&](const SimEvent& e) {
        const auto n = e.detail.int_at("n");
        if (n < 40) s.schedule(s.now() + static_cast<Ms>(gen() % 7), Kind::Timer, kA, kA, Detail{}.add("n", n + 1), step);
    };
    s.schedule(0, Kind::Timer, kA, kA, Detail{}.add("n", 0), step);
    s.schedule(0, Kind::Timer, kB, kB, Detail{}.add("n", 20), step);
    for (auto t : stops) s.run_until(t);
    return s.trace().render();
}

TEST(Scheduler, SplitRunEqualsSingleRun) {
    const auto single = chain_trace({1000});
    EXPECT_EQ(chain_trace({0, 17, 18, 60, 1000}), single);
    EXPECT_EQ(chain_trace({5, 5, 999, 1000}), single);
}

TEST(Network, DelayIsLatencyTimesHops) {
    Scheduler s;
    Network n(s, 1);
    n.add_node(kA);
    n.add_node(kB);
    n.add_link({kA, kB, 2, 3});
    n.send(kA, kB, Kind::Notify, {}, noop());
    s.run_until(100);
    ASSERT_EQ(s.trace().size(), 1u);
    EXPECT_EQ(s.trace()[0].t, 6);
    EXPECT_EQ(s.trace()[0].detail.int_at("sent"), 0);
}

TEST(Network, UnknownNodeIsAnError) {
    Scheduler s;
    Network n(s, 1);
    n.add_node(kA);
    EXPECT_THROW(n.add_link({kA, NodeId{"ghost"}, 1, 1}), NetworkError);
    EXPECT_THROW(n.send(kA, NodeId{"ghost"}, Kind::Notify, {}, noop()), NetworkError);
}

std::vector<Ms> jittered_deliveries(std::uint64_t seed) {
    Scheduler s;
    Network n(s, seed, {0, 2000});
    n.add_node(kA);
    n.add_node(kB);
    n.connect(kA, kB, 5, 1);
    std::vector<Ms> sent_at;
    for (Ms t = 0; t < 100; ++t) {
        s.schedule(t * 10, Kind::Timer, kA, kA, {}, [&](const SimEvent&) { n.send(kA, kB, Kind::Notify, {}, noop()); });
    }
    s.run_until(10000);
    std::vector<Ms> out;
    for (const auto& r : s.trace())
        if (r.kind == Kind::Notify) out.push_back(r.t - r.detail.int_at("sent"));
    return out;
}

TEST(Network, JitterWithinBoundsAndReproducible) {
    const auto a = jittered_deliveries(42);
    ASSERT_EQ(a.size(), 100u);
    for (auto d : a) {
        EXPECT_GE(d, 5);
        EXPECT_LE(d, 5 + 2000);  // clamping to an earlier send never exceeds that send's bound
    }
    EXPECT_EQ(a, jittered_deliveries(42));
    EXPECT_NE(a, jittered_deliveries(43));
}

TEST(Network, JitterSourceMatchesDocumentedDraw) {
    JitterSource j(9, {3, 17});
    std::mt19937_64 gen(9);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(j.draw(), 3 + static_cast<Ms>(gen() % 15));
}

TEST(Network, FifoPerOrderedPair) {
    Scheduler s;
    Network n(s, 5, {0, 500});
    n.add_node(kA);
    n.add_node(kB);
    n.connect(kA, kB, 1, 1);
    for (int i = 0; i < 200; ++i) {
        s.schedule(i, Kind::Timer, kA, kA, {}, [&, i](const SimEvent&) {
            n.send(kA, kB, Kind::Notify, Detail{}.add("i", std::int64_t{i}), noop());
        });
    }
    s.run_until(100000);
    std::int64_t last = -1;
    for (const auto& r : s.trace()) {
        if (r.kind != Kind::Notify) continue;
        EXPECT_EQ(r.detail.int_at("i"), last + 1);
        last = r.detail.int_at("i");
    }
    EXPECT_EQ(last, 199);
}

} // namespace
} // namespace ctxauth::sim
