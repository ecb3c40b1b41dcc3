#pragma once

#include "ctxauth/core/types.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace ctxauth::context {

struct Coord {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Coord&) const = default;
};

// Raw observer reading: number, coordinate pair, string or boolean.
using Value = std::variant<double, Coord, std::string, bool>;

// "num", "coord", "str" or "bool".
std::string_view type_name(const Value& v) noexcept;

// Shortest decimal that round-trips (std::to_chars); coordinates as (x,y);
// booleans as true/false; strings verbatim.
std::string format_number(double v);
std::string format_value(const Value& v);

// Inverse of the typed rendering `<type>:<value>` used by trace details.
std::string typed_value(const Value& v);
Value parse_typed_value(std::string_view text);

// Byte string over which authenticity tags are computed:
//   <type>:<observer-id>:<value>:<timestamp-ms>
std::string canonical_encoding(const ObserverId& observer, const Value& value, Ms timestamp);

} // namespace ctxauth::context
