#include "ctxauth/sim/scheduler.hpp"

namespace ctxauth::sim {

EventId Scheduler::schedule(Ms due, Kind kind, NodeId from, NodeId to, Detail detail, Handler handler) {
    if (due < now_) {
        throw SchedulerError("cannot schedule " + std::string(to_string(kind)) + " at " + std::to_string(due) +
                             " before now=" + std::to_string(now_));
    }
    if (is_annotation(kind)) {
        throw SchedulerError("annotation kinds are not schedulable: " + std::string(to_string(kind)));
    }
    EventId id{due, next_seq_++};
    SimEvent ev{id.seq, due, kind, std::move(from), std::move(to), std::move(detail)};
    queue_.emplace(id, Entry{std::move(ev), std::move(handler)});
    return id;
}

bool Scheduler::cancel(EventId id) {
    return queue_.erase(id) > 0;
}

std::vector<TraceRecord> Scheduler::run_until(Ms t) {
    if (t < now_) throw SchedulerError("run_until target precedes the clock");
    const std::size_t first = trace_.size();
    while (!queue_.empty() && queue_.begin()->first.due <= t) {
        auto node = queue_.extract(queue_.begin());
        Entry& entry = node.mapped();
        const SimEvent& ev = entry.event;
        now_ = ev.due;
        current_seq_ = ev.seq;
        trace_.append(TraceRecord{ev.due, ev.seq, ev.kind, ev.from.str(), ev.to.str(), ev.detail});
        if (entry.handler) entry.handler(ev);
        if (step_hook_) step_hook_();
        ++processed_;
        current_seq_ = 0;
    }
    now_ = t;
    return {trace_.begin() + static_cast<std::ptrdiff_t>(first), trace_.end()};
}

void Scheduler::annotate(Kind kind, const NodeId& from, const NodeId& to, Detail detail) {
    trace_.append(TraceRecord{now_, current_seq_, kind, from.str(), to.str(), std::move(detail)});
}

} // namespace ctxauth::sim
