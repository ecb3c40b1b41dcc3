#include "ctxauth/context/value.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace ctxauth::context {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double parse_double(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    return v;
}

} // namespace

std::string_view type_name(const Value& v) noexcept {
    return std::visit(overloaded{
                          [](double) { return std::string_view("num"); },
                          [](const Coord&) { return std::string_view("coord"); },
                          [](const std::string&) { return std::string_view("str"); },
                          [](bool) { return std::string_view("bool"); },
                      },
                      v);
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf.data(), ptr);
}

std::string format_value(const Value& v) {
    return std::visit(overloaded{
                          [](double d) { return format_number(d); },
                          [](const Coord& c) { return "(" + format_number(c.x) + "," + format_number(c.y) + ")"; },
                          [](const std::string& s) { return s; },
                          [](bool b) { return std::string(b ? "true" : "false"); },
                      },
                      v);
}

std::string typed_value(const Value& v) {
    return std::string(type_name(v)) + ":" + format_value(v);
}

Value parse_typed_value(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("typed value without type prefix");
    auto type = text.substr(0, colon);
    auto body = text.substr(colon + 1);
    if (type == "num") return parse_double(body);
    if (type == "str") return std::string(body);
    if (type == "bool") {
        if (body == "true") return true;
        if (body == "false") return false;
        throw std::invalid_argument("bad boolean: '" + std::string(body) + "'");
    }
    if (type == "coord") {
        if (body.size() < 5 || body.front() != '(' || body.back() != ')') {
            throw std::invalid_argument("bad coordinate: '" + std::string(body) + "'");
        }
        auto inner = body.substr(1, body.size() - 2);
        auto comma = inner.find(',');
        if (comma == std::string_view::npos) throw std::invalid_argument("bad coordinate");
        return Coord{parse_double(inner.substr(0, comma)), parse_double(inner.substr(comma + 1))};
    }
    throw std::invalid_argument("unknown value type '" + std::string(type) + "'");
}

std::string canonical_encoding(const ObserverId& observer, const Value& value, Ms timestamp) {
    std::string out(type_name(value));
    out += ':';
    out += observer.str();
    out += ':';
    out += format_value(value);
    out += ':';
    out += std::to_string(timestamp);
    return out;
}

} // namespace ctxauth::context
