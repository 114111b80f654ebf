#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hype {

enum class Op : std::uint8_t {
    Number,
    Name,
    True,
    False,
    Neg,
    Not,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    And,
    Or,
    Cond,
};

enum class ValueType : std::uint8_t { Real, Bool };

[[nodiscard]] bool is_comparison(Op op) noexcept;

/// Immutable expression tree over named variables and parameters.
///
/// Nodes are shared, so copying an Expr is cheap. Equality is structural:
/// two expressions are equal when their trees have the same shape, the same
/// operators, the same names and bit-identical numeric literals.
class Expr {
  public:
    Expr();

    static Expr number(double value);
    static Expr name(std::string identifier);
    static Expr boolean(bool value);
    static Expr unary(Op op, Expr operand);
    static Expr binary(Op op, Expr lhs, Expr rhs);
    static Expr cond(Expr condition, Expr then_branch, Expr else_branch);

    [[nodiscard]] Op op() const noexcept;
    [[nodiscard]] double number_value() const noexcept;
    [[nodiscard]] const std::string& identifier() const noexcept;
    [[nodiscard]] std::span<const Expr> operands() const noexcept;

    [[nodiscard]] bool is_true() const noexcept { return op() == Op::True; }

    friend bool operator==(const Expr& lhs, const Expr& rhs);

  private:
    struct Node;
    static std::shared_ptr<const Node> make_node(Op op, double number, std::string identifier,
                                                 std::vector<Expr> operands);
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;
};

Expr operator+(Expr lhs, Expr rhs);
Expr operator-(Expr lhs, Expr rhs);
Expr operator*(Expr lhs, Expr rhs);
Expr operator/(Expr lhs, Expr rhs);
Expr operator-(Expr operand);

/// Conjunction that drops literal `true` operands, so that conjoining an
/// identity guard leaves the other guard untouched.
[[nodiscard]] Expr conjoin(const Expr& lhs, const Expr& rhs);

using Value = std::variant<double, bool>;

/// Variable valuation: the values of every name an expression may mention.
class Valuation {
  public:
    Valuation() = default;
    Valuation(std::initializer_list<std::pair<const std::string, double>> values)
        : values_(values) {}

    void set(std::string name, double value) { values_[std::move(name)] = value; }
    [[nodiscard]] const double* find(std::string_view name) const;

  private:
    std::map<std::string, double, std::less<>> values_;
};

/// Evaluates a tree directly. Pure: the valuation is never modified.
/// Throws EvalError on an unknown name, division by zero, a pow argument
/// outside the real domain, or an operand of the wrong type.
[[nodiscard]] Value eval(const Expr& expr, const Valuation& valuation);
[[nodiscard]] double eval_real(const Expr& expr, const Valuation& valuation);
[[nodiscard]] bool eval_bool(const Expr& expr, const Valuation& valuation);

/// Static type of an expression; throws EvalError on an ill-typed tree.
[[nodiscard]] ValueType infer_type(const Expr& expr);

/// Replaces names by expressions. Names absent from the map are kept.
[[nodiscard]] Expr substitute(const Expr& expr, const std::map<std::string, Expr>& replacement);

void collect_names(const Expr& expr, std::set<std::string>& out);
[[nodiscard]] std::set<std::string> names_of(const Expr& expr);

/// Canonical concrete syntax; parses back to a structurally equal tree.
[[nodiscard]] std::string to_string(const Expr& expr);

/// Shortest decimal text that reads back to exactly `value`.
[[nodiscard]] std::string format_number(double value);

} // namespace hype
