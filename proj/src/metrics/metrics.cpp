#include "ctxauth/metrics/metrics.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace ctxauth::metrics {

using sim::Kind;
using sim::TraceRecord;

namespace {

std::uint64_t session_of(const TraceRecord& r) { return static_cast<std::uint64_t>(r.detail.int_at("session")); }

bool is_lease_or_context_revocation(std::string_view cause) {
    return cause == "context-revoked" || cause == "renewal-denied" || cause == "lease-expired";
}

bool is_payload_send(const TraceRecord& r) {
    if (r.kind != Kind::Send) return false;
    const auto msg = r.detail.get("msg");
    return msg && (*msg == "Notify" || *msg == "Response");
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace

std::vector<ReactionTime> compute_reaction_times(const Trace& trace) {
    std::vector<ReactionTime> out;
    std::map<std::uint64_t, const TraceRecord*> open;  // session -> Validity valid=0
    for (const auto& r : trace) {
        if (r.kind == Kind::Validity) {
            if (r.detail.int_at("valid") == 0) open[session_of(r)] = &r;
            else open.erase(session_of(r));
            continue;
        }
        if (r.kind != Kind::Transition) continue;
        const auto cause = r.detail.at("cause");
        if (!is_lease_or_context_revocation(cause)) continue;
        const auto session = session_of(r);
        auto it = open.find(session);
        if (it == open.end()) {
            if (cause == "context-revoked") {
                throw AnalysisError("revocation of session " + std::to_string(session) + " at t=" +
                                    std::to_string(r.t) + " has no matching context invalidation");
            }
            continue;  // lease lapse with a valid context: not a reaction
        }
        const auto& v = *it->second;
        ReactionTime rt;
        rt.session = session;
        rt.subject = r.detail.at("subject");
        rt.cause = cause;
        rt.change = v.detail.int_at("change");
        rt.injected = v.detail.int_at("injected");
        rt.invalidated = v.t;
        rt.revoked = r.t;
        rt.t_observer = v.detail.int_at("t_obs");
        rt.t_phi = v.detail.int_at("t_phi");
        rt.t_comm = v.detail.int_at("t_comm");
        rt.t_lease_wait = r.t - v.t;
        rt.total = r.t - rt.injected;
        out.push_back(std::move(rt));
        open.erase(it);
    }
    return out;
}

MessageCount compute_message_counts(const Trace& trace, AuthMode mode, Ms t0, Ms t1) {
    MessageCount m;
    m.mode = mode;
    m.t0 = t0;
    m.t1 = t1;
    for (const auto& r : trace) {
        switch (r.kind) {
        case Kind::Subscribe:
        case Kind::RegisterInterest:
            if (r.t >= t0 && r.t <= t1) ++m.subscribes;
            break;
        case Kind::Renew: {
            const Ms expiry = r.detail.int_at("expiry");
            if (expiry >= t0 && expiry <= t1) ++m.renewals;
            break;
        }
        case Kind::ContextUpdate:
        case Kind::ObserverAppear:
        case Kind::ObserverDisappear:
            if (r.t >= t0 && r.t <= t1) ++m.context_updates;
            break;
        default: break;
        }
    }
    m.authorization_messages = m.subscribes;
    if (mode == AuthMode::QuasiStatic) m.authorization_messages += m.renewals;
    if (mode == AuthMode::Dynamic) m.authorization_messages += m.context_updates;
    return m;
}

std::vector<LeakReport> compute_leaks(const Trace& trace) {
    struct State {
        bool authorized = false;
        bool valid = true;
        std::optional<std::size_t> report;  // index into out while a window is open
    };
    std::vector<LeakReport> out;
    std::map<std::uint64_t, State> sessions;

    auto update = [&](std::uint64_t id, State& s, const TraceRecord& r, std::size_t index) {
        const bool leaking = s.authorized && !s.valid;
        if (leaking && !s.report) {
            LeakReport rep;
            rep.session = id;
            rep.subscriber = r.detail.at("subject");
            rep.target = r.detail.at("target");
            rep.window_start = r.t;
            rep.start_index = index;
            s.report = out.size();
            out.push_back(std::move(rep));
        } else if (!leaking && s.report) {
            out[*s.report].window_end = r.t;
            out[*s.report].end_index = index;
            s.report.reset();
        }
    };

    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& r = trace[i];
        if (r.kind == Kind::Validity) {
            auto& s = sessions[session_of(r)];
            s.valid = r.detail.int_at("valid") != 0;
            update(session_of(r), s, r, i);
        } else if (r.kind == Kind::Transition) {
            auto& s = sessions[session_of(r)];
            s.authorized = r.detail.at("to") == "Authorized";
            update(session_of(r), s, r, i);
        } else if (is_payload_send(r)) {
            auto it = sessions.find(session_of(r));
            if (it == sessions.end() || !it->second.report) continue;
            auto& rep = out[*it->second.report];
            ++rep.leaked_deliveries;
            rep.deliveries.push_back(i);
        }
    }
    return out;
}

std::vector<std::string> check_invariants(const Trace& trace, const InvariantConfig& cfg) {
    std::vector<std::string> v;
    auto at = [](const TraceRecord& r) { return "t=" + std::to_string(r.t) + " seq=" + std::to_string(r.seq) + ": "; };

    // Runtime violations recorded by the simulator.
    for (const auto& r : trace) {
        if (r.kind == Kind::Violation) v.push_back(at(r) + r.detail.at("what"));
    }

    // Causality and ordering.
    std::optional<std::pair<Ms, std::uint64_t>> last;
    std::map<std::pair<std::string, std::string>, Ms> last_sent;
    for (const auto& r : trace) {
        if (sim::is_annotation(r.kind)) {
            if (last && (r.t != last->first || (r.seq != 0 && r.seq != last->second))) {
                v.push_back(at(r) + "annotation is not attached to the event being processed");
            }
            continue;
        }
        const std::pair<Ms, std::uint64_t> key{r.t, r.seq};
        if (last && key <= *last) v.push_back(at(r) + "events out of (time, seq) order");
        last = key;
        if (auto sent = r.detail.get("sent")) {
            const Ms s = r.detail.int_at("sent");
            if (s > r.t) v.push_back(at(r) + "delivered before it was sent");
            auto& prev = last_sent[{r.from, r.to}];
            if (s < prev) v.push_back(at(r) + "FIFO order broken on " + r.from + "->" + r.to);
            prev = std::max(prev, s);
        }
    }

    // Mode-specific authorization properties.
    std::vector<ReactionTime> reactions;
    try {
        reactions = compute_reaction_times(trace);
    } catch (const AnalysisError& e) {
        v.push_back(std::string("analysis: ") + e.what());
    }
    const auto leaks = compute_leaks(trace);
    if (cfg.mode == AuthMode::Dynamic) {
        for (const auto& l : leaks) {
            if (l.leaked_deliveries > 0) {
                v.push_back("dynamic mode leaked " + std::to_string(l.leaked_deliveries) + " deliveries to " +
                            l.subscriber + " from t=" + std::to_string(l.window_start));
            }
        }
        for (const auto& rt : reactions) {
            if (rt.t_lease_wait != 0) v.push_back("dynamic revocation of " + rt.subject + " lagged the context change");
        }
    }
    if (cfg.mode == AuthMode::QuasiStatic) {
        for (const auto& rt : reactions) {
            if (rt.t_lease_wait > cfg.lease_ms + cfg.jitter_spread) {
                v.push_back("quasi-static revocation of " + rt.subject + " waited " + std::to_string(rt.t_lease_wait) +
                            " ms, beyond the lease");
            }
        }
    }
    for (const auto& r : trace) {
        if (r.kind != Kind::Transition) continue;
        const auto cause = r.detail.at("cause");
        if (cfg.mode == AuthMode::Static && cause != "authentication" && cause != "grant" && cause != "deny" &&
            cause != "logoff") {
            v.push_back(at(r) + "static session changed state by " + cause);
        }
        if (cfg.mode != AuthMode::Dynamic && (cause == "context-revoked" || cause == "context-regranted")) {
            v.push_back(at(r) + "context-driven transition outside dynamic mode");
        }
    }

    // Group keys.
    using SubChan = std::pair<std::string, std::string>;
    std::map<SubChan, std::set<std::int64_t>> held;
    std::map<SubChan, std::int64_t> revoked_at;  // last epoch the subject was entitled to
    std::map<std::string, std::int64_t> epoch;
    std::set<std::uint64_t> unsubscribe_seqs;
    for (const auto& r : trace) {
        switch (r.kind) {
        case Kind::Unsubscribe: unsubscribe_seqs.insert(r.seq); break;
        case Kind::RegisterInterest: revoked_at.erase({r.detail.at("subject"), r.detail.at("channel")}); break;
        case Kind::Rotate: {
            const auto ch = r.detail.at("channel");
            const auto e = r.detail.int_at("epoch");
            const auto prev = epoch.contains(ch) ? epoch[ch] : 1;
            if (e != prev + 1) v.push_back(at(r) + "epoch of " + ch + " jumped from " + std::to_string(prev));
            epoch[ch] = e;
            if (unsubscribe_seqs.contains(r.seq)) v.push_back(at(r) + "unsubscribe rotated the key of " + ch);
            for (const auto& s : split(r.detail.at("excluded"), ';')) revoked_at[{s, ch}] = e - 1;
            break;
        }
        case Kind::RekeyDistribute: {
            SubChan k{r.detail.at("subject"), r.detail.at("channel")};
            const auto e = r.detail.int_at("epoch");
            if (auto it = revoked_at.find(k); it != revoked_at.end() && e > it->second) {
                v.push_back(at(r) + "revoked " + k.first + " received epoch " + std::to_string(e));
            }
            held[k].insert(e);
            break;
        }
        case Kind::Decrypt: {
            if (r.detail.int_at("ok") == 0) break;
            SubChan k{r.detail.at("subject"), r.detail.at("channel")};
            const auto e = r.detail.int_at("epoch");
            if (!held[k].contains(e)) v.push_back(at(r) + k.first + " decrypted epoch " + std::to_string(e) + " without its key");
            if (auto it = revoked_at.find(k); it != revoked_at.end() && e > it->second) {
                v.push_back(at(r) + "revoked " + k.first + " decrypted epoch " + std::to_string(e));
            }
            break;
        }
        default: break;
        }
    }

    // Request atomicity: the k-th request to arrive has id k.
    std::vector<const TraceRecord*> requests;
    std::map<std::int64_t, int> replies;
    for (const auto& r : trace) {
        if (r.kind == Kind::Request) requests.push_back(&r);
        if (r.kind == Kind::Send && r.detail.has("request")) ++replies[r.detail.int_at("request")];
    }
    for (std::size_t k = 0; k < requests.size(); ++k) {
        const auto id = static_cast<std::int64_t>(k + 1);
        const int n = replies.contains(id) ? replies[id] : 0;
        const auto& req = *requests[k];
        const bool finished_in_time = req.t + req.detail.int_at("duration") <= cfg.end;
        if (n > 1 || (n == 0 && finished_in_time)) {
            v.push_back(at(req) + "request " + std::to_string(id) + " ended with " + std::to_string(n) + " replies");
        }
    }
    return v;
}

Ms max_total(const std::vector<ReactionTime>& rs) {
    Ms m = 0;
    for (const auto& r : rs) m = std::max(m, r.total);
    return m;
}

Ms median_total(const std::vector<ReactionTime>& rs) {
    if (rs.empty()) return 0;
    std::vector<Ms> totals;
    for (const auto& r : rs) totals.push_back(r.total);
    std::sort(totals.begin(), totals.end());
    return totals[(totals.size() - 1) / 2];
}

Summary summarize(const Trace& trace, const SummaryInput& in) {
    Summary s;
    s.scenario = in.scenario;
    s.mode = in.mode;
    s.lease_ms = in.lease_ms;
    s.seed = in.seed;
    std::vector<ReactionTime> reactions;
    try {
        reactions = compute_reaction_times(trace);
    } catch (const AnalysisError&) {
        // reported by check_invariants below
    }
    s.reactions = reactions.size();
    s.reaction_max_ms = max_total(reactions);
    s.reaction_median_ms = median_total(reactions);
    for (const auto& r : reactions) s.lease_wait_max_ms = std::max(s.lease_wait_max_ms, r.t_lease_wait);
    s.messages = compute_message_counts(trace, in.mode, 0, in.end);
    for (const auto& l : compute_leaks(trace)) {
        ++s.leak_windows;
        s.leaked_deliveries += l.leaked_deliveries;
    }
    for (const auto& r : trace) {
        if (!sim::is_annotation(r.kind)) ++s.events;
        if (r.kind == Kind::Rotate) ++s.rotations;
        if (r.kind == Kind::Send) {
            const auto msg = r.detail.at("msg");
            if (msg == "Notify") ++s.deliveries;
            if (msg == "Response") ++s.responses;
            if (msg == "AccessDenied") ++s.access_denied;
        }
    }
    s.violation_messages = check_invariants(trace, {in.mode, in.lease_ms, in.jitter_spread, in.end});
    s.violations = s.violation_messages.size();
    return s;
}

namespace {

std::vector<std::pair<std::string, std::string>> fields(const Summary& s) {
    auto n = [](auto x) { return std::to_string(x); };
    return {
        {"scenario", s.scenario},
        {"mode", std::string(authz::to_string(s.mode))},
        {"lease_ms", n(s.lease_ms)},
        {"seed", n(s.seed)},
        {"events", n(s.events)},
        {"reactions", n(s.reactions)},
        {"reaction_max_ms", n(s.reaction_max_ms)},
        {"reaction_median_ms", n(s.reaction_median_ms)},
        {"lease_wait_max_ms", n(s.lease_wait_max_ms)},
        {"window_t0_ms", n(s.messages.t0)},
        {"window_t1_ms", n(s.messages.t1)},
        {"subscribes", n(s.messages.subscribes)},
        {"renewals", n(s.messages.renewals)},
        {"context_updates", n(s.messages.context_updates)},
        {"authorization_messages", n(s.messages.authorization_messages)},
        {"deliveries", n(s.deliveries)},
        {"leak_windows", n(s.leak_windows)},
        {"leaked_deliveries", n(s.leaked_deliveries)},
        {"responses", n(s.responses)},
        {"access_denied", n(s.access_denied)},
        {"rotations", n(s.rotations)},
        {"violations", n(s.violations)},
    };
}

} // namespace

std::string to_key_value(const Summary& s) {
    std::ostringstream out;
    for (const auto& [k, val] : fields(s)) out << k << '=' << val << '\n';
    return out.str();
}

std::string to_yaml(const Summary& s) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    for (const auto& [k, val] : fields(s)) {
        out << YAML::Key << k << YAML::Value;
        if (k == "scenario" || k == "mode") out << YAML::DoubleQuoted << val;
        else out << val;
    }
    out << YAML::Key << "violation_messages" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : s.violation_messages) out << YAML::DoubleQuoted << m;
    out << YAML::EndSeq << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace ctxauth::metrics
