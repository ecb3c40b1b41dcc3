#pragma once

#include "ctxauth/context/phi.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>

namespace ctxauth::context {

enum class ObserverStatus {
    Missing,          // absent, no reading yet, or reading older than the freshness window
    Unauthenticated,  // present with a fresh reading that failed verification
    Usable,
};

struct StoredInfo {
    ObserverInfo info;
    bool authentic = false;
};

struct DiscoveryEvent {
    enum class Type { Appear, Disappear };
    Type type;
    ObserverId observer;
    Ms at = 0;
};

struct ContextEvent {
    ObserverId observer;
    Ms at = 0;
    bool authentic = false;
};

// Result of looking a phi up against the registry at one instant.
struct PhiReading {
    ObserverStatus status = ObserverStatus::Missing;
    bool value = false;       // meaningful only when status == Usable
    bool eval_error = false;  // operator did not apply to the reading; value is false
    std::string error;
};

class RegistryError : public std::runtime_error {
public:
    enum class Code { DuplicateAppearance, NotPresent, UnknownObserver, TimestampRegression, UnknownPhi, DuplicatePhi };

    RegistryError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

// Observers currently discovered, their latest readings, trust anchors and
// the set of phi predicates. Copying a registry yields an independent
// snapshot.
class ObserverRegistry {
public:
    static constexpr Ms kDefaultFreshness = 5000;

    explicit ObserverRegistry(std::shared_ptr<const TagFunction> tags = default_tag_function());

    void set_default_freshness(Ms window);
    void set_freshness(const ObserverId& observer, Ms window);
    Ms freshness(const ObserverId& observer) const;

    void add_anchor(TrustAnchor anchor);
    const TrustAnchor* anchor(const ObserverId& observer) const;

    void register_phi(PhiPredicate phi);
    bool has_phi(const PhiId& id) const { return phis_.contains(id); }
    const PhiPredicate& phi(const PhiId& id) const;
    const std::map<PhiId, PhiPredicate>& phis() const noexcept { return phis_; }

    // The observer is present with no reading; it counts as missing until
    // its first authentic value arrives. An anchor given here replaces any
    // previously registered one.
    DiscoveryEvent appear(const ObserverId& observer, std::optional<TrustAnchor> anchor, Ms now);
    DiscoveryEvent disappear(const ObserverId& observer, Ms now);

    // Replaces the latest reading. Authenticity is verified here and cached.
    ContextEvent publish(ObserverInfo info);

    bool is_present(const ObserverId& observer) const { return present_.contains(observer); }
    std::set<ObserverId> present() const;
    const StoredInfo* latest(const ObserverId& observer) const;
    ObserverStatus status(const ObserverId& observer, Ms now) const;

    PhiReading read_phi(const PhiId& id, Ms now) const;

    // Phi whose observer is present, maintained as observers come and go.
    const std::set<PhiId>& active_phis() const noexcept { return active_; }
    // Same set computed from scratch.
    std::set<PhiId> recompute_active_phis() const;

    const TagFunction& tags() const noexcept { return *tags_; }

private:
    std::shared_ptr<const TagFunction> tags_;
    Ms default_freshness_ = kDefaultFreshness;
    std::map<ObserverId, Ms> freshness_;
    std::map<ObserverId, TrustAnchor> anchors_;
    std::map<PhiId, PhiPredicate> phis_;
    std::map<ObserverId, std::optional<StoredInfo>> present_;
    std::set<PhiId> active_;
};

// Read-only view of a registry at one instant, handed to evaluators.
struct RegistryView {
    const ObserverRegistry& registry;
    Ms now = 0;
};

} // namespace ctxauth::context
