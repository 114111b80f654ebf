#include "hype/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

#include "hype/error.hpp"

namespace hype {

struct Expr::Node {
    Op op = Op::Number;
    double number = 0.0;
    std::string identifier;
    std::vector<Expr> operands;
};

std::shared_ptr<const Expr::Node> Expr::make_node(Op op, double number, std::string identifier,
                                            std::vector<Expr> operands) {
    auto node = std::make_shared<Expr::Node>();
    node->op = op;
    node->number = number;
    node->identifier = std::move(identifier);
    node->operands = std::move(operands);
    return node;
}

namespace {

std::size_t arity(Op op) {
    switch (op) {
    case Op::Number:
    case Op::Name:
    case Op::True:
    case Op::False:
        return 0;
    case Op::Neg:
    case Op::Not:
        return 1;
    case Op::Cond:
        return 3;
    default:
        return 2;
    }
}

const char* symbol(Op op) {
    switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Eq: return "=";
    case Op::Ge: return ">=";
    case Op::Gt: return ">";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Pow: return "pow";
    case Op::Min: return "min";
    case Op::Max: return "max";
    default: return "?";
    }
}

// Binding strength used by the printer; higher binds tighter.
int precedence(Op op) {
    switch (op) {
    case Op::Cond: return 0;
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Not: return 3;
    case Op::Lt:
    case Op::Le:
    case Op::Eq:
    case Op::Ge:
    case Op::Gt: return 4;
    case Op::Add:
    case Op::Sub: return 5;
    case Op::Mul:
    case Op::Div: return 6;
    case Op::Neg: return 7;
    default: return 9;
    }
}

void print(const Expr& e, std::string& out);

void print_operand(const Expr& e, int min_precedence, std::string& out) {
    if (precedence(e.op()) < min_precedence) {
        out += '(';
        print(e, out);
        out += ')';
    } else {
        print(e, out);
    }
}

void print(const Expr& e, std::string& out) {
    const auto args = e.operands();
    switch (e.op()) {
    case Op::Number:
        out += format_number(e.number_value());
        return;
    case Op::Name:
        out += e.identifier();
        return;
    case Op::True:
        out += "true";
        return;
    case Op::False:
        out += "false";
        return;
    case Op::Neg:
        out += '-';
        // A literal operand would otherwise re-read as a negative literal.
        if (args[0].op() == Op::Number || args[0].op() == Op::Neg) {
            out += '(';
            print(args[0], out);
            out += ')';
        } else {
            print_operand(args[0], precedence(Op::Neg), out);
        }
        return;
    case Op::Not:
        out += "not ";
        print_operand(args[0], precedence(Op::Not), out);
        return;
    case Op::Pow:
    case Op::Min:
    case Op::Max:
        out += symbol(e.op());
        out += '(';
        print(args[0], out);
        out += ", ";
        print(args[1], out);
        out += ')';
        return;
    case Op::Cond:
        out += "if ";
        print(args[0], out);
        out += " then ";
        print(args[1], out);
        out += " else ";
        print(args[2], out);
        return;
    default:
        break;
    }
    const int p = precedence(e.op());
    // Left-associative operators; comparisons do not chain.
    const bool comparison = is_comparison(e.op());
    print_operand(args[0], comparison ? p + 1 : p, out);
    out += ' ';
    out += symbol(e.op());
    out += ' ';
    print_operand(args[1], p + 1, out);
}

Value eval_node(const Expr& e, const Valuation& v);

double as_real(const Value& value, const char* context) {
    if (const auto* d = std::get_if<double>(&value)) {
        return *d;
    }
    throw EvalError(std::string("type mismatch: boolean operand to ") + context);
}

bool as_bool(const Value& value, const char* context) {
    if (const auto* b = std::get_if<bool>(&value)) {
        return *b;
    }
    throw EvalError(std::string("type mismatch: real operand to ") + context);
}

Value eval_node(const Expr& e, const Valuation& v) {
    const auto args = e.operands();
    switch (e.op()) {
    case Op::Number:
        return e.number_value();
    case Op::Name:
        if (const double* value = v.find(e.identifier())) {
            return *value;
        }
        throw EvalError("unknown variable '" + e.identifier() + "'");
    case Op::True:
        return true;
    case Op::False:
        return false;
    case Op::Neg:
        return -as_real(eval_node(args[0], v), "negation");
    case Op::Not:
        return !as_bool(eval_node(args[0], v), "not");
    case Op::And:
        return as_bool(eval_node(args[0], v), "and") && as_bool(eval_node(args[1], v), "and");
    case Op::Or:
        return as_bool(eval_node(args[0], v), "or") || as_bool(eval_node(args[1], v), "or");
    case Op::Cond:
        return as_bool(eval_node(args[0], v), "if") ? eval_node(args[1], v) : eval_node(args[2], v);
    default:
        break;
    }
    const char* sym = symbol(e.op());
    const double a = as_real(eval_node(args[0], v), sym);
    const double b = as_real(eval_node(args[1], v), sym);
    switch (e.op()) {
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
    case Op::Lt: return a < b;
    case Op::Le: return a <= b;
    case Op::Eq: return a == b;
    case Op::Ge: return a >= b;
    case Op::Gt: return a > b;
    default: throw EvalError("malformed expression");
    }
}

} // namespace

bool is_comparison(Op op) noexcept {
    return op == Op::Lt || op == Op::Le || op == Op::Eq || op == Op::Ge || op == Op::Gt;
}

Expr::Expr() : node_(make_node(Op::Number, 0.0, {}, {})) {}

Expr Expr::number(double value) { return Expr(make_node(Op::Number, value, {}, {})); }

Expr Expr::name(std::string identifier) {
    return Expr(make_node(Op::Name, 0.0, std::move(identifier), {}));
}

Expr Expr::boolean(bool value) { return Expr(make_node(value ? Op::True : Op::False, 0.0, {}, {})); }

Expr Expr::unary(Op op, Expr operand) {
    if (arity(op) != 1) {
        throw ArgumentError("operator is not unary");
    }
    return Expr(make_node(op, 0.0, {}, {std::move(operand)}));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
    if (arity(op) != 2) {
        throw ArgumentError("operator is not binary");
    }
    return Expr(make_node(op, 0.0, {}, {std::move(lhs), std::move(rhs)}));
}

Expr Expr::cond(Expr condition, Expr then_branch, Expr else_branch) {
    return Expr(make_node(Op::Cond, 0.0, {},
                          {std::move(condition), std::move(then_branch), std::move(else_branch)}));
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::number_value() const noexcept { return node_->number; }
const std::string& Expr::identifier() const noexcept { return node_->identifier; }
std::span<const Expr> Expr::operands() const noexcept { return node_->operands; }

bool operator==(const Expr& lhs, const Expr& rhs) {
    if (lhs.node_ == rhs.node_) {
        return true;
    }
    const auto& a = *lhs.node_;
    const auto& b = *rhs.node_;
    if (a.op != b.op) {
        return false;
    }
    switch (a.op) {
    case Op::Number:
        // Bitwise, so that -0.0 and 0.0 are distinct literals.
        return std::memcmp(&a.number, &b.number, sizeof(double)) == 0;
    case Op::Name:
        return a.identifier == b.identifier;
    default:
        return a.operands == b.operands;
    }
}

Expr operator+(Expr lhs, Expr rhs) { return Expr::binary(Op::Add, std::move(lhs), std::move(rhs)); }
Expr operator-(Expr lhs, Expr rhs) { return Expr::binary(Op::Sub, std::move(lhs), std::move(rhs)); }
Expr operator*(Expr lhs, Expr rhs) { return Expr::binary(Op::Mul, std::move(lhs), std::move(rhs)); }
Expr operator/(Expr lhs, Expr rhs) { return Expr::binary(Op::Div, std::move(lhs), std::move(rhs)); }
Expr operator-(Expr operand) { return Expr::unary(Op::Neg, std::move(operand)); }

Expr conjoin(const Expr& lhs, const Expr& rhs) {
    if (lhs.is_true()) {
        return rhs;
    }
    if (rhs.is_true() || lhs == rhs) {
        return lhs;
    }
    return Expr::binary(Op::And, lhs, rhs);
}

const double* Valuation::find(std::string_view name) const {
    auto it = values_.find(name);
    return it == values_.end() ? nullptr : &it->second;
}

Value eval(const Expr& expr, const Valuation& valuation) { return eval_node(expr, valuation); }

double eval_real(const Expr& expr, const Valuation& valuation) {
    return as_real(eval_node(expr, valuation), "real context");
}

bool eval_bool(const Expr& expr, const Valuation& valuation) {
    return as_bool(eval_node(expr, valuation), "boolean context");
}

ValueType infer_type(const Expr& expr) {
    const auto args = expr.operands();
    auto expect = [](const Expr& operand, ValueType wanted, const char* context) {
        if (infer_type(operand) != wanted) {
            throw EvalError(std::string("type mismatch in ") + context + ": '" + to_string(operand) +
                            "' is " + (wanted == ValueType::Real ? "boolean" : "real"));
        }
    };
    switch (expr.op()) {
    case Op::Number:
    case Op::Name:
        return ValueType::Real;
    case Op::True:
    case Op::False:
        return ValueType::Bool;
    case Op::Neg:
        expect(args[0], ValueType::Real, "negation");
        return ValueType::Real;
    case Op::Not:
        expect(args[0], ValueType::Bool, "not");
        return ValueType::Bool;
    case Op::And:
    case Op::Or:
        expect(args[0], ValueType::Bool, symbol(expr.op()));
        expect(args[1], ValueType::Bool, symbol(expr.op()));
        return ValueType::Bool;
    case Op::Cond: {
        expect(args[0], ValueType::Bool, "if");
        const ValueType t = infer_type(args[1]);
        expect(args[2], t, "else branch");
        return t;
    }
    default:
        expect(args[0], ValueType::Real, symbol(expr.op()));
        expect(args[1], ValueType::Real, symbol(expr.op()));
        return is_comparison(expr.op()) ? ValueType::Bool : ValueType::Real;
    }
}

Expr substitute(const Expr& expr, const std::map<std::string, Expr>& replacement) {
    switch (expr.op()) {
    case Op::Name: {
        auto it = replacement.find(expr.identifier());
        return it == replacement.end() ? expr : it->second;
    }
    case Op::Number:
    case Op::True:
    case Op::False:
        return expr;
    default:
        break;
    }
    const auto args = expr.operands();
    if (args.size() == 1) {
        return Expr::unary(expr.op(), substitute(args[0], replacement));
    }
    if (args.size() == 2) {
        return Expr::binary(expr.op(), substitute(args[0], replacement),
                            substitute(args[1], replacement));
    }
    return Expr::cond(substitute(args[0], replacement), substitute(args[1], replacement),
                      substitute(args[2], replacement));
}

void collect_names(const Expr& expr, std::set<std::string>& out) {
    if (expr.op() == Op::Name) {
        out.insert(expr.identifier());
        return;
    }
    for (const auto& operand : expr.operands()) {
        collect_names(operand, out);
    }
}

std::set<std::string> names_of(const Expr& expr) {
    std::set<std::string> out;
    collect_names(expr, out);
    return out;
}

std::string to_string(const Expr& expr) {
    std::string out;
    print(expr, out);
    return out;
}

std::string format_number(double value) {
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) {
        return "nan";
    }
    return {buffer, end};
}

} // namespace hype
