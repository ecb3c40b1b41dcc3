#include "ctxauth/context/registry.hpp"

namespace ctxauth::context {

ObserverRegistry::ObserverRegistry(std::shared_ptr<const TagFunction> tags) : tags_(std::move(tags)) {
    if (!tags_) throw std::invalid_argument("registry needs a tag function");
}

void ObserverRegistry::set_default_freshness(Ms window) {
    if (window < 0) throw std::invalid_argument("freshness window must be non-negative");
    default_freshness_ = window;
}

void ObserverRegistry::set_freshness(const ObserverId& observer, Ms window) {
    if (window < 0) throw std::invalid_argument("freshness window must be non-negative");
    freshness_[observer] = window;
}

Ms ObserverRegistry::freshness(const ObserverId& observer) const {
    auto it = freshness_.find(observer);
    return it == freshness_.end() ? default_freshness_ : it->second;
}

void ObserverRegistry::add_anchor(TrustAnchor anchor) {
    auto id = anchor.observer;
    anchors_.insert_or_assign(std::move(id), std::move(anchor));
}

const TrustAnchor* ObserverRegistry::anchor(const ObserverId& observer) const {
    auto it = anchors_.find(observer);
    return it == anchors_.end() ? nullptr : &it->second;
}

void ObserverRegistry::register_phi(PhiPredicate p) {
    validate(p);
    if (phis_.contains(p.id)) {
        throw RegistryError(RegistryError::Code::DuplicatePhi, "phi '" + p.id.str() + "' already registered");
    }
    if (is_present(p.observer)) active_.insert(p.id);
    auto id = p.id;
    phis_.emplace(std::move(id), std::move(p));
}

const PhiPredicate& ObserverRegistry::phi(const PhiId& id) const {
    auto it = phis_.find(id);
    if (it == phis_.end()) throw RegistryError(RegistryError::Code::UnknownPhi, "unknown phi '" + id.str() + "'");
    return it->second;
}

DiscoveryEvent ObserverRegistry::appear(const ObserverId& observer, std::optional<TrustAnchor> a, Ms now) {
    if (is_present(observer)) {
        throw RegistryError(RegistryError::Code::DuplicateAppearance,
                            "observer '" + observer.str() + "' is already present");
    }
    if (a) {
        if (a->observer != observer) throw std::invalid_argument("trust anchor belongs to another observer");
        add_anchor(std::move(*a));
    }
    present_.emplace(observer, std::nullopt);
    for (const auto& [id, p] : phis_) {
        if (p.observer == observer) active_.insert(id);
    }
    return {DiscoveryEvent::Type::Appear, observer, now};
}

DiscoveryEvent ObserverRegistry::disappear(const ObserverId& observer, Ms now) {
    if (!present_.erase(observer)) {
        throw RegistryError(RegistryError::Code::NotPresent, "observer '" + observer.str() + "' is not present");
    }
    for (const auto& [id, p] : phis_) {
        if (p.observer == observer) active_.erase(id);
    }
    return {DiscoveryEvent::Type::Disappear, observer, now};
}

ContextEvent ObserverRegistry::publish(ObserverInfo info) {
    auto it = present_.find(info.observer);
    if (it == present_.end()) {
        throw RegistryError(RegistryError::Code::UnknownObserver,
                            "observer '" + info.observer.str() + "' is not present");
    }
    if (it->second && info.timestamp < it->second->info.timestamp) {
        throw RegistryError(RegistryError::Code::TimestampRegression,
                            "reading from '" + info.observer.str() + "' at " + std::to_string(info.timestamp) +
                                " is older than the stored one at " + std::to_string(it->second->info.timestamp));
    }
    const auto* a = anchor(info.observer);
    const bool authentic = a != nullptr && verify_authenticity(info, *a, *tags_);
    ContextEvent ev{info.observer, info.timestamp, authentic};
    it->second = StoredInfo{std::move(info), authentic};
    return ev;
}

std::set<ObserverId> ObserverRegistry::present() const {
    std::set<ObserverId> out;
    for (const auto& [id, _] : present_) out.insert(id);
    return out;
}

const StoredInfo* ObserverRegistry::latest(const ObserverId& observer) const {
    auto it = present_.find(observer);
    if (it == present_.end() || !it->second) return nullptr;
    return &*it->second;
}

ObserverStatus ObserverRegistry::status(const ObserverId& observer, Ms now) const {
    const auto* stored = latest(observer);
    if (!stored) return ObserverStatus::Missing;
    if (now - stored->info.timestamp > freshness(observer)) return ObserverStatus::Missing;
    return stored->authentic ? ObserverStatus::Usable : ObserverStatus::Unauthenticated;
}

PhiReading ObserverRegistry::read_phi(const PhiId& id, Ms now) const {
    const auto& p = phi(id);
    PhiReading r;
    r.status = status(p.observer, now);
    if (r.status != ObserverStatus::Usable) return r;
    try {
        r.value = evaluate_phi(p, latest(p.observer)->info);
    } catch (const PhiEvalError& e) {
        r.value = false;
        r.eval_error = true;
        r.error = e.what();
    }
    return r;
}

std::set<PhiId> ObserverRegistry::recompute_active_phis() const {
    std::set<PhiId> out;
    for (const auto& [id, p] : phis_) {
        if (is_present(p.observer)) out.insert(id);
    }
    return out;
}

} // namespace ctxauth::context
