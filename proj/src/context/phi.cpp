#include "ctxauth/context/phi.hpp"

#include <array>
#include <cmath>

namespace ctxauth::context {

namespace {

constexpr std::array<std::pair<PhiOp, std::string_view>, 12> kOpNames{{
    {PhiOp::Eq, "eq"},
    {PhiOp::Neq, "neq"},
    {PhiOp::Lt, "lt"},
    {PhiOp::Le, "le"},
    {PhiOp::Gt, "gt"},
    {PhiOp::Ge, "ge"},
    {PhiOp::InRange, "in_range"},
    {PhiOp::InZone, "in_zone"},
    {PhiOp::InSet, "in_set"},
    {PhiOp::And, "and"},
    {PhiOp::Or, "or"},
    {PhiOp::Not, "not"},
}};

bool is_number(const Value& v) { return std::holds_alternative<double>(v); }

double number_of(const Value& v, PhiOp op) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw PhiEvalError(std::string(to_string(op)) + " expects a number, got " + std::string(type_name(v)));
}

void require(bool ok, PhiOp op, const char* what) {
    if (!ok) throw PhiDefinitionError(std::string(to_string(op)) + ": " + what);
}

void require_same_type(const Value& literal, const Value& value, PhiOp op) {
    if (literal.index() != value.index()) {
        throw PhiEvalError(std::string(to_string(op)) + " compares " + std::string(type_name(literal)) + " with " +
                           std::string(type_name(value)));
    }
}

} // namespace

std::string_view to_string(PhiOp op) noexcept {
    for (const auto& [o, name] : kOpNames) {
        if (o == op) return name;
    }
    return "?";
}

std::optional<PhiOp> parse_phi_op(std::string_view text) noexcept {
    for (const auto& [o, name] : kOpNames) {
        if (name == text) return o;
    }
    return std::nullopt;
}

void validate(const PhiExpr& e) {
    switch (e.op) {
    case PhiOp::Eq:
    case PhiOp::Neq:
        require(e.operands.size() == 1 && e.children.empty(), e.op, "needs exactly one literal");
        break;
    case PhiOp::Lt:
    case PhiOp::Le:
    case PhiOp::Gt:
    case PhiOp::Ge:
        require(e.operands.size() == 1 && e.children.empty(), e.op, "needs exactly one literal");
        require(is_number(e.operands[0]), e.op, "literal must be a number");
        break;
    case PhiOp::InRange:
        require(e.operands.size() == 2 && e.children.empty(), e.op, "needs lo and hi");
        require(is_number(e.operands[0]) && is_number(e.operands[1]), e.op, "bounds must be numbers");
        require(std::get<double>(e.operands[0]) <= std::get<double>(e.operands[1]), e.op, "lo must not exceed hi");
        break;
    case PhiOp::InZone:
        require(e.operands.size() == 2 && e.children.empty(), e.op, "needs center and radius");
        require(std::holds_alternative<Coord>(e.operands[0]), e.op, "center must be a coordinate");
        require(is_number(e.operands[1]), e.op, "radius must be a number");
        require(std::get<double>(e.operands[1]) > 0.0, e.op, "radius must be positive");
        break;
    case PhiOp::InSet:
        require(!e.operands.empty() && e.children.empty(), e.op, "needs at least one member");
        for (const auto& m : e.operands) {
            require(m.index() == e.operands[0].index(), e.op, "members must share one type");
        }
        break;
    case PhiOp::And:
    case PhiOp::Or:
        require(!e.children.empty() && e.operands.empty(), e.op, "needs at least one sub-predicate");
        for (const auto& c : e.children) validate(c);
        break;
    case PhiOp::Not:
        require(e.children.size() == 1 && e.operands.empty(), e.op, "needs exactly one sub-predicate");
        validate(e.children[0]);
        break;
    }
}

void validate(const PhiPredicate& p) {
    if (p.id.empty()) throw PhiDefinitionError("phi id must not be empty");
    if (p.observer.empty()) throw PhiDefinitionError("phi '" + p.id.str() + "' has no observer");
    if (p.processing_ms < 0) throw PhiDefinitionError("phi '" + p.id.str() + "' has negative processing time");
    try {
        validate(p.expr);
    } catch (const PhiDefinitionError& err) {
        throw PhiDefinitionError("phi '" + p.id.str() + "': " + err.what());
    }
}

bool evaluate(const PhiExpr& e, const Value& value) {
    switch (e.op) {
    case PhiOp::Eq:
        require_same_type(e.operands[0], value, e.op);
        return e.operands[0] == value;
    case PhiOp::Neq:
        require_same_type(e.operands[0], value, e.op);
        return e.operands[0] != value;
    case PhiOp::Lt: return number_of(value, e.op) < std::get<double>(e.operands[0]);
    case PhiOp::Le: return number_of(value, e.op) <= std::get<double>(e.operands[0]);
    case PhiOp::Gt: return number_of(value, e.op) > std::get<double>(e.operands[0]);
    case PhiOp::Ge: return number_of(value, e.op) >= std::get<double>(e.operands[0]);
    case PhiOp::InRange: {
        const double v = number_of(value, e.op);
        return std::get<double>(e.operands[0]) <= v && v <= std::get<double>(e.operands[1]);
    }
    case PhiOp::InZone: {
        const auto* p = std::get_if<Coord>(&value);
        if (!p) throw PhiEvalError("in_zone expects a coordinate, got " + std::string(type_name(value)));
        const auto& c = std::get<Coord>(e.operands[0]);
        return std::hypot(p->x - c.x, p->y - c.y) <= std::get<double>(e.operands[1]);
    }
    case PhiOp::InSet:
        require_same_type(e.operands[0], value, e.op);
        for (const auto& m : e.operands) {
            if (m == value) return true;
        }
        return false;
    case PhiOp::And:
        for (const auto& c : e.children) {
            if (!evaluate(c, value)) return false;
        }
        return true;
    case PhiOp::Or:
        for (const auto& c : e.children) {
            if (evaluate(c, value)) return true;
        }
        return false;
    case PhiOp::Not: return !evaluate(e.children[0], value);
    }
    return false;
}

bool evaluate_phi(const PhiPredicate& p, const ObserverInfo& info) {
    if (info.observer != p.observer) {
        throw std::invalid_argument("phi '" + p.id.str() + "' is attached to '" + p.observer.str() +
                                    "', not '" + info.observer.str() + "'");
    }
    return evaluate(p.expr, info.value);
}

namespace phi {

PhiExpr eq(Value v) { return {PhiOp::Eq, {std::move(v)}, {}}; }
PhiExpr neq(Value v) { return {PhiOp::Neq, {std::move(v)}, {}}; }
PhiExpr lt(double v) { return {PhiOp::Lt, {v}, {}}; }
PhiExpr le(double v) { return {PhiOp::Le, {v}, {}}; }
PhiExpr gt(double v) { return {PhiOp::Gt, {v}, {}}; }
PhiExpr ge(double v) { return {PhiOp::Ge, {v}, {}}; }
PhiExpr in_range(double lo, double hi) { return {PhiOp::InRange, {lo, hi}, {}}; }
PhiExpr in_zone(Coord center, double radius) { return {PhiOp::InZone, {center, radius}, {}}; }
PhiExpr in_set(std::vector<Value> members) { return {PhiOp::InSet, std::move(members), {}}; }
PhiExpr all_of(std::vector<PhiExpr> children) { return {PhiOp::And, {}, std::move(children)}; }
PhiExpr any_of(std::vector<PhiExpr> children) { return {PhiOp::Or, {}, std::move(children)}; }
PhiExpr negate(PhiExpr child) { return {PhiOp::Not, {}, {std::move(child)}}; }

} // namespace phi

} // namespace ctxauth::context
