#pragma once

#include "ctxauth/context/observer.hpp"

#include <optional>
#include <vector>

namespace ctxauth::context {

enum class PhiOp { Eq, Neq, Lt, Le, Gt, Ge, InRange, InZone, InSet, And, Or, Not };

std::string_view to_string(PhiOp op) noexcept;
std::optional<PhiOp> parse_phi_op(std::string_view text) noexcept;

// Predicate tree over a single observer's value. Leaf operators carry typed
// literal operands; And/Or/Not combine children over the same value.
//   Eq/Neq      one literal of any type
//   Lt/Le/Gt/Ge one number
//   InRange     lo, hi numbers, lo <= hi, closed interval
//   InZone      center coordinate, radius > 0, closed disc (Euclidean)
//   InSet       one or more literals of one type
//   And/Or      one or more children; Not exactly one child
struct PhiExpr {
    PhiOp op = PhiOp::Eq;
    std::vector<Value> operands;
    std::vector<PhiExpr> children;

    bool operator==(const PhiExpr&) const = default;
};

struct PhiPredicate {
    PhiId id;
    ObserverId observer;
    PhiExpr expr;
    // Time the predicate needs before its verdict on a new reading is usable,
    // e.g. when it filters against the history of values. Zero means instant.
    Ms processing_ms = 0;

    bool operator==(const PhiPredicate&) const = default;
};

class PhiDefinitionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Operator does not apply to the reading's type. The engine treats this as
// a false verdict.
class PhiEvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws PhiDefinitionError on arity, operand type, lo > hi or radius <= 0.
void validate(const PhiExpr& expr);
void validate(const PhiPredicate& phi);

bool evaluate(const PhiExpr& expr, const Value& value);

// Throws std::invalid_argument when the info comes from another observer and
// PhiEvalError on a type mismatch.
bool evaluate_phi(const PhiPredicate& phi, const ObserverInfo& info);

namespace phi {
PhiExpr eq(Value v);
PhiExpr neq(Value v);
PhiExpr lt(double v);
PhiExpr le(double v);
PhiExpr gt(double v);
PhiExpr ge(double v);
PhiExpr in_range(double lo, double hi);
PhiExpr in_zone(Coord center, double radius);
PhiExpr in_set(std::vector<Value> members);
PhiExpr all_of(std::vector<PhiExpr> children);
PhiExpr any_of(std::vector<PhiExpr> children);
PhiExpr negate(PhiExpr child);
} // namespace phi

} // namespace ctxauth::context
