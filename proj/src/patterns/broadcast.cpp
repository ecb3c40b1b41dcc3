#include "ctxauth/patterns/broadcast.hpp"

namespace ctxauth::patterns {

namespace {

void put_u64(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

context::SipKey key_of(const Bytes& material) {
    context::SipKey k{};
    if (material.size() == k.size()) {
        std::copy(material.begin(), material.end(), k.begin());
        return k;
    }
    return context::derive_key(material);
}

std::uint64_t tag_of(const context::SipKey& k, std::uint64_t nonce, std::span<const std::uint8_t> body) {
    Bytes msg{'t', 'g'};
    put_u64(msg, nonce);
    msg.insert(msg.end(), body.begin(), body.end());
    return context::siphash24(k, msg);
}

void apply_keystream(const context::SipKey& k, std::uint64_t nonce, std::span<std::uint8_t> data) {
    for (std::size_t block = 0; block * 8 < data.size(); ++block) {
        Bytes in{'k', 's'};
        put_u64(in, nonce);
        put_u64(in, block);
        const std::uint64_t ks = context::siphash24(k, in);
        for (std::size_t i = 0; i < 8 && block * 8 + i < data.size(); ++i) {
            data[block * 8 + i] ^= static_cast<std::uint8_t>(ks >> (8 * i));
        }
    }
}

} // namespace

Bytes SipSeal::seal(const Bytes& key, std::uint64_t nonce, std::string_view plaintext) const {
    const auto k = key_of(key);
    Bytes out(plaintext.begin(), plaintext.end());
    apply_keystream(k, nonce, out);
    put_u64(out, tag_of(k, nonce, out));
    return out;
}

std::optional<std::string> SipSeal::open(const Bytes& key, std::uint64_t nonce, const Bytes& sealed) const {
    if (sealed.size() < 8) return std::nullopt;
    const auto k = key_of(key);
    const std::size_t n = sealed.size() - 8;
    std::uint64_t tag = 0;
    for (int i = 0; i < 8; ++i) tag |= std::uint64_t{sealed[n + i]} << (8 * i);
    if (tag != tag_of(k, nonce, std::span(sealed.data(), n))) return std::nullopt;
    Bytes body(sealed.begin(), sealed.begin() + static_cast<std::ptrdiff_t>(n));
    apply_keystream(k, nonce, body);
    return std::string(body.begin(), body.end());
}

std::optional<std::string> open_ciphertext(const Seal& seal, const GroupKey& key, const Ciphertext& ct) {
    if (key.channel != ct.channel || key.epoch != ct.epoch) return std::nullopt;
    return seal.open(key.key_material, ct.message, ct.sealed);
}

std::string_view to_string(RotationCause cause) noexcept {
    return cause == RotationCause::Revocation ? "revocation" : "manual";
}

BroadcastService::BroadcastService(SessionTable& sessions, NodeId producer, std::uint64_t key_seed,
                                   std::shared_ptr<const Seal> seal)
    : sessions_(sessions), producer_(std::move(producer)), seal_(std::move(seal)) {
    if (!seal_) throw std::invalid_argument("seal must not be null");
    Bytes seed;
    put_u64(seed, key_seed);
    seed_key_ = context::derive_key(seed);
}

Bytes BroadcastService::derive(const ChannelId& channel, std::uint64_t epoch) const {
    Bytes out;
    for (std::uint8_t half = 0; half < 2; ++half) {
        Bytes msg{half};
        msg.insert(msg.end(), channel.str().begin(), channel.str().end());
        msg.push_back(0);
        put_u64(msg, epoch);
        put_u64(out, context::siphash24(seed_key_, msg));
    }
    return out;
}

void BroadcastService::add_channel(const ChannelId& channel, Target target) {
    if (channels_.contains(channel)) {
        throw PatternError(PatternError::Code::Duplicate, "channel '" + channel.str() + "' already exists");
    }
    ChannelState st{std::move(target), GroupKey{channel, 1, derive(channel, 1)}, {}, {}};
    channels_.emplace(channel, std::move(st));
}

BroadcastService::ChannelState& BroadcastService::state(const ChannelId& channel) {
    auto it = channels_.find(channel);
    if (it == channels_.end()) throw PatternError(PatternError::Code::UnknownChannel, "unknown broadcast channel '" + channel.str() + "'");
    return it->second;
}

const BroadcastService::ChannelState& BroadcastService::state(const ChannelId& channel) const {
    return const_cast<BroadcastService*>(this)->state(channel);
}

Announcement BroadcastService::announce(const ChannelId& channel) const {
    return Announcement{channel, producer_, state(channel).target.operation()};
}

RegistrationResult BroadcastService::register_interest(const SubjectId& subject, const ChannelId& channel,
                                                       std::string_view credential,
                                                       const context::RegistryView& view) {
    auto& st = state(channel);
    RegistrationResult out;
    if (auto it = st.registrations.find(subject); it != st.registrations.end()) {
        if (it->second.holder) {
            throw PatternError(PatternError::Code::Duplicate,
                               "'" + subject.str() + "' already holds the key of '" + channel.str() + "'");
        }
        if (!sessions_.engine().check_credential(subject, credential)) {
            out.denial = DenialReason::BadCredential;
            return out;
        }
        if (!sessions_.at(it->second.session).authorized_at(view.now)) {
            out.denial = DenialReason::NotAuthorized;
            return out;
        }
        it->second.holder = true;
        reinstate(channel, st, subject);
        out.key = st.key;
        return out;
    }
    auto admission = sessions_.admit(subject, st.target, credential, view);
    out.transitions = std::move(admission.transitions);
    out.denial = admission.denial;
    if (!admission.granted()) return out;
    st.registrations[subject] = Registration{*admission.session, true};
    reinstate(channel, st, subject);
    out.key = st.key;
    return out;
}

RegistrationResult BroadcastService::renew(const SubjectId& subject, const ChannelId& channel,
                                           std::string_view credential, const context::RegistryView& view) {
    if (sessions_.mode() != AuthMode::QuasiStatic) throw ContractViolation("renew applies to quasi-static mode only");
    auto& st = state(channel);
    RegistrationResult out;
    if (auto it = st.registrations.find(subject); it != st.registrations.end()) {
        auto& session = sessions_.at(it->second.session);
        if (session.authorized_at(view.now)) {
            if (!sessions_.engine().check_credential(subject, credential)) {
                if (auto t = sessions_.close(it->second.session, view.now)) out.transitions.push_back(*t);
                revoke(channel, st, it, false);
                out.denial = DenialReason::BadCredential;
                return out;
            }
            auto r = sessions_.engine().renew(session, view);
            if (r.transition) out.transitions.push_back(*r.transition);
            if (r.granted) {
                out.key = st.key;
            } else {
                revoke(channel, st, it, false);
                out.denial = DenialReason::NotAuthorized;
            }
            return out;
        }
        if (auto t = sessions_.engine().on_lease_tick(session, view.now)) out.transitions.push_back(*t);
        revoke(channel, st, it, false);
    }
    auto fresh = register_interest(subject, channel, credential, view);
    fresh.transitions.insert(fresh.transitions.begin(), out.transitions.begin(), out.transitions.end());
    return fresh;
}

std::optional<Transition> BroadcastService::unregister(const SubjectId& subject, const ChannelId& channel, Ms now) {
    auto& st = state(channel);
    auto it = st.registrations.find(subject);
    if (it == st.registrations.end()) {
        throw PatternError(PatternError::Code::NotSubscribed,
                           "'" + subject.str() + "' is not registered on '" + channel.str() + "'");
    }
    auto t = sessions_.close(it->second.session, now);
    st.registrations.erase(it);
    return t;
}

Ciphertext BroadcastService::broadcast(const ChannelId& channel, std::string_view payload) {
    const auto& st = state(channel);
    const std::uint64_t message = next_message_++;
    return Ciphertext{channel, st.key.epoch, message, seal_->seal(st.key.key_material, message, payload)};
}

Rotation BroadcastService::rotate_group_key(const ChannelId& channel, RotationCause cause) {
    auto& st = state(channel);
    auto current = holders(channel);
    if (cause == RotationCause::Manual && current.empty()) {
        throw ContractViolation("manual rotation of '" + channel.str() + "' without key holders");
    }
    const std::uint64_t epoch = st.key.epoch + 1;
    st.key = GroupKey{channel, epoch, derive(channel, epoch)};
    Rotation r{st.key, cause, std::move(current), std::move(st.excluded)};
    st.excluded.clear();
    pending_.erase(channel);
    return r;
}

void BroadcastService::revoke(const ChannelId& channel, ChannelState& st,
                              std::map<SubjectId, Registration>::iterator it, bool keep_registration) {
    if (it->second.holder) {
        st.excluded.push_back(it->first);
        pending_.insert(channel);
    }
    if (keep_registration) {
        it->second.holder = false;
    } else {
        sessions_.discard(it->second.session);
        st.registrations.erase(it);
    }
}

void BroadcastService::reinstate(const ChannelId& channel, ChannelState& st, const SubjectId& subject) {
    std::erase(st.excluded, subject);
    if (st.excluded.empty()) pending_.erase(channel);
}

void BroadcastService::on_transition(const Transition& t) {
    if (!t.is_revocation() || t.cause == authz::TransitionCause::Logoff) return;
    for (auto& [channel, st] : channels_) {
        for (auto it = st.registrations.begin(); it != st.registrations.end(); ++it) {
            if (it->second.session != t.session) continue;
            revoke(channel, st, it, t.cause == authz::TransitionCause::ContextRevoked);
            return;
        }
    }
}

std::vector<Rotation> BroadcastService::flush() {
    std::vector<Rotation> out;
    const auto channels = pending_;
    for (const auto& c : channels) out.push_back(rotate_group_key(c, RotationCause::Revocation));
    return out;
}

const GroupKey& BroadcastService::current_key(const ChannelId& channel) const { return state(channel).key; }

std::vector<SubjectId> BroadcastService::holders(const ChannelId& channel) const {
    std::vector<SubjectId> out;
    for (const auto& [s, reg] : state(channel).registrations) {
        if (reg.holder) out.push_back(s);
    }
    return out;
}

} // namespace ctxauth::patterns
