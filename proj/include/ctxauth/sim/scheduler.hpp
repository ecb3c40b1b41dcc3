#pragma once

#include "ctxauth/sim/trace.hpp"

#include <functional>
#include <map>
#include <vector>

namespace ctxauth::sim {

struct SimEvent {
    std::uint64_t seq = 0;
    Ms due = 0;
    Kind kind = Kind::Timer;
    NodeId from;
    NodeId to;
    Detail detail;
};

using Handler = std::function<void(const SimEvent&)>;

struct EventId {
    Ms due = 0;
    std::uint64_t seq = 0;
    auto operator<=>(const EventId&) const = default;
};

class SchedulerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Single-threaded discrete-event loop. Events are processed in (due, seq)
// order; seq is the insertion counter, so events sharing a due time run in
// the order they were scheduled. Every processed event is appended to the
// trace before its handler runs, so records the handler adds through
// annotate() follow it.
class Scheduler {
public:
    Ms now() const noexcept { return now_; }

    // Throws SchedulerError when due < now().
    EventId schedule(Ms due, Kind kind, NodeId from, NodeId to, Detail detail, Handler handler);

    // Returns false when the event already ran or was cancelled.
    bool cancel(EventId id);

    // Processes every event with due <= t, then sets the clock to t.
    // Returns the trace records appended by this call.
    std::vector<TraceRecord> run_until(Ms t);

    // Appends a record stamped with the event currently being processed.
    // Outside event processing the record carries seq 0 and the current time.
    void annotate(Kind kind, const NodeId& from, const NodeId& to, Detail detail);

    // Called after each event handler returns; may annotate and schedule.
    void set_step_hook(std::function<void()> hook) { step_hook_ = std::move(hook); }

    const Trace& trace() const noexcept { return trace_; }
    std::size_t pending() const noexcept { return queue_.size(); }
    std::uint64_t processed() const noexcept { return processed_; }

private:
    struct Entry {
        SimEvent event;
        Handler handler;
    };

    Ms now_ = 0;
    std::uint64_t next_seq_ = 1;
    std::uint64_t current_seq_ = 0;
    std::uint64_t processed_ = 0;
    std::map<EventId, Entry> queue_;
    Trace trace_;
    std::function<void()> step_hook_;
};

} // namespace ctxauth::sim
