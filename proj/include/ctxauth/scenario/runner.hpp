#pragma once

#include "ctxauth/scenario/scenario.hpp"
#include "ctxauth/sim/trace.hpp"

namespace ctxauth::scenario {

// Executes a scenario in its configured mode. One engine node hosts the
// observer registry, the rule engine and every producer; observers and
// subjects talk to it over the simulated links.
//
// Trace vocabulary beyond the processed events (all detail keys are stable):
//   Validity    session subject target valid cause change inject injected t_obs t_comm t_phi
//               producer-side truth of a session's context after each change
//   Transition  session subject target from to cause
//   Send        msg(Notify|Response|AccessDenied|BroadcastCipher) ... payload left the engine
//   Rotate      channel epoch cause recipients excluded
//   Decrypt     subject channel epoch held ok
//   Violation   what  (runtime invariant failure)
// ContextUpdate carries change/inject/t_obs/ts; every network delivery
// carries sent=<ms>; Renew carries the expiry being renewed.
struct RunResult {
    sim::Trace trace;
    Ms end = 0;
    std::vector<std::string> violations;  // runtime checks, also present as Violation records
};

RunResult run(const Scenario& scenario);

} // namespace ctxauth::scenario
