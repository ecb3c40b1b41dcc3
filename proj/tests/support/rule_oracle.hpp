#pragma once

#include "ctxauth/authz/engine.hpp"

#include <string>
#include <vector>

namespace ctxauth::testing {

// One observer's situation in an enumerated case.
struct ObserverCase {
    bool present = false;
    bool authentic = false;
    bool value = false;
};

// Condition as a list of observer indices; observer i has a single phi
// "phi<i>" that holds when its boolean reading is true.
using ConditionShape = std::vector<int>;

// Brute force, written without the engine: a condition holds when every
// observer it names is present, authentic and reads true; access is the OR.
inline bool oracle_authorized(const std::vector<ObserverCase>& obs, const std::vector<ConditionShape>& conds) {
    for (const auto& c : conds) {
        bool all = true;
        for (int i : c) all = all && obs[i].present && obs[i].authentic && obs[i].value;
        if (all) return true;
    }
    return false;
}

inline ObserverId observer_name(int i) { return ObserverId{"ob" + std::to_string(i)}; }
inline PhiId phi_name(int i) { return PhiId{"phi" + std::to_string(i)}; }

// Builds the registry state for one case at time 10.
inline context::ObserverRegistry make_registry(const std::vector<ObserverCase>& obs) {
    context::ObserverRegistry reg;
    for (int i = 0; i < static_cast<int>(obs.size()); ++i) {
        const auto id = observer_name(i);
        reg.register_phi({phi_name(i), id, context::phi::eq(true), 0});
        if (!obs[i].present) continue;
        const context::TrustAnchor anchor{id, context::to_bytes("secret-" + std::to_string(i))};
        reg.appear(id, anchor, 0);
        auto info = context::make_signed_info(anchor, obs[i].value, 10);
        if (!obs[i].authentic) info.auth_tag = context::make_signed_info({id, context::to_bytes("forged")}, obs[i].value, 10).auth_tag;
        reg.publish(info);
    }
    return reg;
}

inline void add_conditions(authz::AuthzEngine& engine, const context::ObserverRegistry& reg,
                           const std::vector<ConditionShape>& conds, const authz::Target& target) {
    for (std::size_t c = 0; c < conds.size(); ++c) {
        authz::Condition cond{ConditionId{"c" + std::to_string(c)}, {}, target, authz::SubjectScope::wildcard()};
        for (int i : conds[c]) cond.phi_refs.push_back(phi_name(i));
        engine.add_condition(cond, reg);
    }
}

} // namespace ctxauth::testing
