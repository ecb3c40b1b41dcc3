#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace ctxauth {

// Simulated time, integer milliseconds.
using Ms = std::int64_t;

// String identifier tagged by the domain concept it names, so that a
// subject id cannot be passed where an observer id is expected.
template <class Tag>
class StrongId {
public:
    StrongId() = default;
    explicit StrongId(std::string value) : value_(std::move(value)) {
        if (value_.empty()) throw std::invalid_argument("identifier must not be empty");
    }

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    auto operator<=>(const StrongId&) const = default;

private:
    std::string value_;
};

template <class Tag>
std::ostream& operator<<(std::ostream& os, const StrongId<Tag>& id) {
    return os << id.str();
}

using SubjectId   = StrongId<struct SubjectTag>;
using ObserverId  = StrongId<struct ObserverTag>;
using PhiId       = StrongId<struct PhiTag>;
using ConditionId = StrongId<struct ConditionTag>;
using NodeId      = StrongId<struct NodeTag>;
using ChannelId   = StrongId<struct ChannelTag>;
using ServiceId   = StrongId<struct ServiceTag>;

// Raised when an operation is invoked outside its documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace ctxauth

template <class Tag>
struct std::hash<ctxauth::StrongId<Tag>> {
    std::size_t operator()(const ctxauth::StrongId<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
