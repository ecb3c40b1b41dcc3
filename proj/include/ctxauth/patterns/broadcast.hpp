#pragma once

#include "ctxauth/context/tag.hpp"
#include "ctxauth/patterns/sessions.hpp"

#include <memory>

namespace ctxauth::patterns {

using context::Bytes;

struct GroupKey {
    ChannelId channel;
    std::uint64_t epoch = 0;
    Bytes key_material;

    bool operator==(const GroupKey&) const = default;
};

struct Ciphertext {
    ChannelId channel;
    std::uint64_t epoch = 0;
    std::uint64_t message = 0;
    Bytes sealed;
};

// Keyed sealing. open() must return nullopt for any key other than the one
// used to seal.
class Seal {
public:
    virtual ~Seal() = default;
    virtual Bytes seal(const Bytes& key, std::uint64_t nonce, std::string_view plaintext) const = 0;
    virtual std::optional<std::string> open(const Bytes& key, std::uint64_t nonce, const Bytes& sealed) const = 0;
};

// SipHash-2-4 in counter mode for the keystream, plus a 64-bit tag over the
// nonce and body. Not a real cipher; it only models who can read what.
class SipSeal final : public Seal {
public:
    Bytes seal(const Bytes& key, std::uint64_t nonce, std::string_view plaintext) const override;
    std::optional<std::string> open(const Bytes& key, std::uint64_t nonce, const Bytes& sealed) const override;
};

std::optional<std::string> open_ciphertext(const Seal& seal, const GroupKey& key, const Ciphertext& ct);

enum class RotationCause { Revocation, Manual };
std::string_view to_string(RotationCause cause) noexcept;

struct Rotation {
    GroupKey key;
    RotationCause cause = RotationCause::Manual;
    std::vector<SubjectId> recipients;  // unicast distribution, one message each
    std::vector<SubjectId> excluded;    // holders dropped since the last rotation
};

// First broadcast step: how to reach the producer, nothing secret.
struct Announcement {
    ChannelId channel;
    NodeId producer;
    std::string operation;
};

struct RegistrationResult {
    std::optional<GroupKey> key;
    std::optional<DenialReason> denial;
    std::vector<Transition> transitions;
};

class BroadcastService {
public:
    BroadcastService(SessionTable& sessions, NodeId producer, std::uint64_t key_seed,
                     std::shared_ptr<const Seal> seal = std::make_shared<SipSeal>());

    // Creates the epoch-1 key.
    void add_channel(const ChannelId& channel, Target target);
    bool has_channel(const ChannelId& channel) const { return channels_.contains(channel); }

    Announcement announce(const ChannelId& channel) const;

    // Second step. Authorized registrants become key holders and receive the
    // current epoch. A registrant that is already a holder is an error.
    RegistrationResult register_interest(const SubjectId& subject, const ChannelId& channel,
                                         std::string_view credential, const context::RegistryView& view);

    // QuasiStatic only, same rules as a subscription renewal. A refused
    // renewal drops the holder and queues a rotation.
    RegistrationResult renew(const SubjectId& subject, const ChannelId& channel, std::string_view credential,
                             const context::RegistryView& view);

    // Leaves without a rotation; the subject keeps the key it already has.
    std::optional<Transition> unregister(const SubjectId& subject, const ChannelId& channel, Ms now);

    Ciphertext broadcast(const ChannelId& channel, std::string_view payload);

    // Manual rotation needs at least one holder.
    Rotation rotate_group_key(const ChannelId& channel, RotationCause cause);

    // A revoked holder stops being a holder at once; the rotation that
    // excludes it is deferred to flush() so revocations processed in the
    // same delivery step share one new epoch.
    void on_transition(const Transition& transition);
    std::vector<Rotation> flush();
    bool has_pending() const { return !pending_.empty(); }

    const GroupKey& current_key(const ChannelId& channel) const;
    std::vector<SubjectId> holders(const ChannelId& channel) const;
    const Seal& seal() const noexcept { return *seal_; }

private:
    struct Registration {
        SessionId session = 0;
        bool holder = false;
    };
    struct ChannelState {
        Target target;
        GroupKey key;
        std::map<SubjectId, Registration> registrations;
        std::vector<SubjectId> excluded;
    };

    ChannelState& state(const ChannelId& channel);
    const ChannelState& state(const ChannelId& channel) const;
    Bytes derive(const ChannelId& channel, std::uint64_t epoch) const;
    void revoke(const ChannelId& channel, ChannelState& st, std::map<SubjectId, Registration>::iterator it,
                bool keep_registration);
    // A subject granted again before the pending rotation ran is no longer
    // excluded by it.
    void reinstate(const ChannelId& channel, ChannelState& st, const SubjectId& subject);

    SessionTable& sessions_;
    NodeId producer_;
    context::SipKey seed_key_{};
    std::shared_ptr<const Seal> seal_;
    std::map<ChannelId, ChannelState> channels_;
    std::set<ChannelId> pending_;
    std::uint64_t next_message_ = 1;
};

} // namespace ctxauth::patterns
