#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "hype/expr.hpp"

namespace hype {

/// An expression with every name resolved: variables become indices into a
/// state vector, parameters are folded to their values. Evaluation is
/// allocation-free, which is what the integrator's inner loop needs.
class BoundExpr {
  public:
    /// Relative tolerance of `=` under point evaluation.
    static constexpr double kEqualityTolerance = 1e-12;

    BoundExpr() = default;

    /// Throws EvalError if a name is neither a variable nor a parameter.
    static BoundExpr bind(const Expr& expr, std::span<const std::string> variables,
                          const std::map<std::string, double>& parameters);

    [[nodiscard]] double real(std::span<const double> x) const;

    /// Truth at a single state.
    [[nodiscard]] bool truth(std::span<const double> x) const;

    /// Truth of the closed guard set over the time bracket [a, b]: one-sided
    /// comparisons are tested at `b`, equalities hold if their residual
    /// changes sign (or vanishes) between `a` and `b`.
    [[nodiscard]] bool truth_over(std::span<const double> a, std::span<const double> b) const;

    [[nodiscard]] bool always_true() const noexcept;
    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }

  private:
    struct Node {
        Op op = Op::Number;
        double value = 0.0;
        int index = -1;
        int operand[3] = {-1, -1, -1};
    };

    int add(const Expr& expr, std::span<const std::string> variables,
            const std::map<std::string, double>& parameters);
    [[nodiscard]] double real_at(int node, std::span<const double> x) const;
    [[nodiscard]] bool truth_at(int node, std::span<const double> x) const;
    [[nodiscard]] bool truth_over_at(int node, std::span<const double> a,
                                     std::span<const double> b) const;

    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace hype
