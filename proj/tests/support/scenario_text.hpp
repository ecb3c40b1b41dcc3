#pragma once

#include <string>

namespace ctxauth::testing {

// One engine node "hub", one observer "badge" on node "door" and one
// subscriber "sam" on node "pad", all on direct links. `timeline` is the
// YAML list body (already indented by two spaces).
inline std::string small_scenario(const std::string& timeline, const std::string& mode = "dynamic",
                                  long lease_ms = 60000, long duration_ms = 100000, long latency_ms = 3) {
    const auto lat = std::to_string(latency_ms);
    return "name: \"small\"\n"
           "seed: 1\n"
           "mode: \"" + mode + "\"\n"
           "lease_ms: " + std::to_string(lease_ms) + "\n"
           "renew_lead_ms: 1000\n"
           "jitter_ms: [0, 0]\n"
           "engine: \"hub\"\n"
           "default_freshness_ms: 10000000\n"
           "duration_ms: " + std::to_string(duration_ms) + "\n"
           "nodes: [\"hub\", \"door\", \"pad\"]\n"
           "links:\n"
           "  - {from: \"hub\", to: \"door\", latency_ms: " + lat + ", hops: 1}\n"
           "  - {from: \"hub\", to: \"pad\", latency_ms: " + lat + ", hops: 1}\n"
           "observers:\n"
           "  - {id: \"badge\", node: \"door\", secret: \"door-key\", sense_delay_ms: 0}\n"
           "phis:\n"
           "  - {id: \"inside\", observer: \"badge\", expr: {op: \"eq\", value: true}, processing_ms: 0}\n"
           "conditions:\n"
           "  - {id: \"staff\", phis: [\"inside\"], operation: \"subscribe\", object: \"feed\", subjects: [\"sam\"]}\n"
           "subjects:\n"
           "  - {id: \"sam\", node: \"pad\", secret: \"sam-pw\"}\n"
           "channels:\n"
           "  - {id: \"feed\", kind: \"pubsub\", operation: \"subscribe\"}\n"
           "timeline:\n"
           "  - {at: 0, do: \"appear\", observer: \"badge\"}\n"
           "  - {at: 0, do: \"value\", observer: \"badge\", value: true}\n" +
           timeline;
}

} // namespace ctxauth::testing
