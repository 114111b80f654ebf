#include "hype/bound_expr.hpp"

#include <algorithm>
#include <cmath>

#include "hype/error.hpp"

namespace hype {

namespace {

bool close_enough(double lhs, double rhs) {
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return std::abs(lhs - rhs) <= BoundExpr::kEqualityTolerance * scale;
}

} // namespace

BoundExpr BoundExpr::bind(const Expr& expr, std::span<const std::string> variables,
                          const std::map<std::string, double>& parameters) {
    BoundExpr bound;
    bound.root_ = bound.add(expr, variables, parameters);
    return bound;
}

int BoundExpr::add(const Expr& expr, std::span<const std::string> variables,
                   const std::map<std::string, double>& parameters) {
    Node node;
    node.op = expr.op();
    if (expr.op() == Op::Number) {
        node.value = expr.number_value();
    } else if (expr.op() == Op::Name) {
        auto it = std::find(variables.begin(), variables.end(), expr.identifier());
        if (it != variables.end()) {
            node.index = static_cast<int>(it - variables.begin());
        } else if (auto p = parameters.find(expr.identifier()); p != parameters.end()) {
            node.op = Op::Number;
            node.value = p->second;
        } else {
            throw EvalError("unknown variable '" + expr.identifier() + "'");
        }
    } else {
        const auto args = expr.operands();
        for (std::size_t i = 0; i < args.size(); ++i) {
            node.operand[i] = add(args[i], variables, parameters);
        }
    }
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
}

bool BoundExpr::always_true() const noexcept { return !nodes_.empty() && nodes_[root_].op == Op::True; }

double BoundExpr::real(std::span<const double> x) const { return real_at(root_, x); }

bool BoundExpr::truth(std::span<const double> x) const { return truth_at(root_, x); }

bool BoundExpr::truth_over(std::span<const double> a, std::span<const double> b) const {
    return truth_over_at(root_, a, b);
}

double BoundExpr::real_at(int index, std::span<const double> x) const {
    const Node& n = nodes_[index];
    switch (n.op) {
    case Op::Number:
        return n.value;
    case Op::Name:
        return x[n.index];
    case Op::Neg:
        return -real_at(n.operand[0], x);
    case Op::Cond:
        return truth_at(n.operand[0], x) ? real_at(n.operand[1], x) : real_at(n.operand[2], x);
    default:
        break;
    }
    const double a = real_at(n.operand[0], x);
    const double b = real_at(n.operand[1], x);
    switch (n.op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
        if (b == 0.0) {
            throw EvalError("division by zero");
        }
        return a / b;
    case Op::Pow: {
        const double r = std::pow(a, b);
        if (std::isnan(r) && !std::isnan(a) && !std::isnan(b)) {
            throw EvalError("pow argument outside the real domain");
        }
        return r;
    }
    case Op::Min: return std::min(a, b);
    case Op::Max: return std::max(a, b);
    default: throw EvalError("boolean expression in real context");
    }
}

bool BoundExpr::truth_at(int index, std::span<const double> x) const {
    const Node& n = nodes_[index];
    switch (n.op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Not: return !truth_at(n.operand[0], x);
    case Op::And: return truth_at(n.operand[0], x) && truth_at(n.operand[1], x);
    case Op::Or: return truth_at(n.operand[0], x) || truth_at(n.operand[1], x);
    case Op::Cond:
        return truth_at(n.operand[0], x) ? truth_at(n.operand[1], x) : truth_at(n.operand[2], x);
    default:
        break;
    }
    const double a = real_at(n.operand[0], x);
    const double b = real_at(n.operand[1], x);
    switch (n.op) {
    case Op::Lt: return a < b;
    case Op::Le: return a <= b;
    case Op::Eq: return close_enough(a, b);
    case Op::Ge: return a >= b;
    case Op::Gt: return a > b;
    default: throw EvalError("real expression in boolean context");
    }
}

bool BoundExpr::truth_over_at(int index, std::span<const double> a,
                              std::span<const double> b) const {
    const Node& n = nodes_[index];
    switch (n.op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Not: return !truth_over_at(n.operand[0], a, b);
    case Op::And: return truth_over_at(n.operand[0], a, b) && truth_over_at(n.operand[1], a, b);
    case Op::Or: return truth_over_at(n.operand[0], a, b) || truth_over_at(n.operand[1], a, b);
    case Op::Cond:
        return truth_at(n.operand[0], b) ? truth_over_at(n.operand[1], a, b)
                                         : truth_over_at(n.operand[2], a, b);
    default:
        break;
    }
    const double rb = real_at(n.operand[0], b) - real_at(n.operand[1], b);
    switch (n.op) {
    // Strict comparisons fire at the boundary of their closure.
    case Op::Lt:
    case Op::Le: return rb <= 0.0;
    case Op::Gt:
    case Op::Ge: return rb >= 0.0;
    case Op::Eq: {
        const double ra = real_at(n.operand[0], a) - real_at(n.operand[1], a);
        return (ra <= 0.0 && rb >= 0.0) || (ra >= 0.0 && rb <= 0.0) || truth_at(index, b);
    }
    default: throw EvalError("real expression in boolean context");
    }
}

} // namespace hype
