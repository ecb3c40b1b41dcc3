#pragma once

#include "ctxauth/core/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ctxauth::sim {

// Everything that can appear in the `kind=` field of a trace line. The first
// group are events processed by the scheduler; the second group are records
// appended while an event is being processed (state transitions, payload
// sends, context-validity changes, key rotations, decryption attempts and
// runtime invariant violations).
enum class Kind {
    Inject,
    ContextUpdate,
    ObserverAppear,
    ObserverDisappear,
    Subscribe,
    SubscribeAck,
    Renew,
    Unsubscribe,
    Notify,
    Request,
    Response,
    AccessDenied,
    BroadcastAnnounce,
    RegisterInterest,
    RekeyDistribute,
    BroadcastCipher,
    LeaseExpiry,
    Timer,
    // annotations
    Validity,
    Transition,
    Send,
    Rotate,
    Decrypt,
    Violation,
};

std::string_view to_string(Kind kind) noexcept;
std::optional<Kind> parse_kind(std::string_view text) noexcept;
bool is_annotation(Kind kind) noexcept;

// Ordered key=value list rendered as `k1=v1,k2=v2`. Values are
// percent-escaped so that `,`, `=`, `%` and whitespace survive a round trip.
class Detail {
public:
    Detail() = default;
    Detail(std::initializer_list<std::pair<std::string, std::string>> items);

    Detail& add(std::string key, std::string value);
    Detail& add(std::string key, std::int64_t value);

    std::optional<std::string_view> get(std::string_view key) const;
    std::string at(std::string_view key) const;
    std::int64_t int_at(std::string_view key) const;
    bool has(std::string_view key) const { return get(key).has_value(); }

    const std::vector<std::pair<std::string, std::string>>& items() const noexcept { return items_; }

    std::string render() const;
    static Detail parse(std::string_view text);

    bool operator==(const Detail&) const = default;

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

struct TraceRecord {
    Ms t = 0;
    std::uint64_t seq = 0;
    Kind kind = Kind::Inject;
    std::string from;
    std::string to;
    Detail detail;

    // t=<ms> seq=<n> kind=<KIND> from=<id> to=<id> detail=<key=value,...>
    std::string to_line() const;
    static TraceRecord parse_line(std::string_view line);

    bool operator==(const TraceRecord&) const = default;
};

class TraceParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Append-only event log.
class Trace {
public:
    void append(TraceRecord record) { records_.push_back(std::move(record)); }

    const std::vector<TraceRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const TraceRecord& operator[](std::size_t i) const { return records_[i]; }

    auto begin() const noexcept { return records_.begin(); }
    auto end() const noexcept { return records_.end(); }

    std::string render() const;
    void write(std::ostream& os) const;
    static Trace parse(std::string_view text);
    static Trace from_records(std::vector<TraceRecord> records);

private:
    std::vector<TraceRecord> records_;
};

} // namespace ctxauth::sim
