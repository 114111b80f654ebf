#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hype/expr.hpp"
#include "hype/model.hpp"

namespace hype {

/// Structured mode name: an influence, a controller state, or a pair of
/// factor labels produced by a product.
class ModeLabel {
  public:
    enum class Kind : std::uint8_t { Influence, Controller, Unit, Pair };

    ModeLabel();

    static ModeLabel influence(std::string text);
    static ModeLabel controller(std::string text);
    static ModeLabel unit();
    static ModeLabel pair(ModeLabel left, ModeLabel right);

    [[nodiscard]] Kind kind() const noexcept;
    [[nodiscard]] const std::string& text() const noexcept;
    [[nodiscard]] const ModeLabel& left() const;
    [[nodiscard]] const ModeLabel& right() const;

    /// Leaves print as their text, pairs as "(left, right)".
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const ModeLabel& lhs, const ModeLabel& rhs);

  private:
    struct Node;
    explicit ModeLabel(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Continuous transition (q, s, f): adds s * f(X) to dX/dt in mode q.
struct Flow {
    int mode = 0;
    std::vector<double> stoichiometry;
    Expr rate;

    friend bool operator==(const Flow&, const Flow&) = default;
};

struct InstantaneousTransition {
    int source = 0;
    int target = 0;
    Expr guard = Expr::boolean(true);
    Reset reset;
    double weight = 1.0;
    std::string event;

    friend bool operator==(const InstantaneousTransition&, const InstantaneousTransition&) = default;
};

struct StochasticTransition {
    int source = 0;
    int target = 0;
    Expr guard = Expr::boolean(true);
    Reset reset;
    Expr rate;
    std::string event;

    friend bool operator==(const StochasticTransition&, const StochasticTransition&) = default;
};

/// Transition-driven stochastic hybrid automaton. Modes are indices into
/// `modes`; `variables` fixes the state-vector layout. Expressions may
/// mention parameters, resolved against `parameters` when bound.
struct Tdsha {
    std::vector<ModeLabel> modes;
    std::vector<std::string> variables;
    std::vector<Flow> flows;
    std::vector<InstantaneousTransition> instantaneous;
    std::vector<StochasticTransition> stochastic;
    std::set<std::string> instantaneous_events;
    std::set<std::string> stochastic_events;
    int initial_mode = 0;
    /// Conjunction of assignments; unassigned variables start at 0.
    Reset initial_point;
    std::map<std::string, double> parameters;

    friend bool operator==(const Tdsha&, const Tdsha&) = default;

    /// One mode, nothing else: the neutral element of the product.
    static Tdsha unit();

    [[nodiscard]] std::size_t mode_count() const noexcept { return modes.size(); }
    [[nodiscard]] std::optional<int> find_mode(const std::string& label) const;
    [[nodiscard]] std::optional<int> variable_index(const std::string& name) const;
    [[nodiscard]] std::set<std::string> events() const;

    /// Initial valuation with parameters substituted; throws EvalError.
    [[nodiscard]] std::vector<double> initial_state() const;
    /// Variables the initial-point formula leaves at their default.
    [[nodiscard]] std::vector<std::string> defaulted_variables() const;
};

/// Checks the structural invariants (endpoints, event partition, vector
/// lengths, rate consistency); throws CompileError on the first failure.
void check_well_formed(const Tdsha& automaton);

/// Event whose stochastic transitions carry structurally different rates.
[[nodiscard]] std::optional<std::string> rate_inconsistency(const Tdsha& automaton);

struct CompatibilityWitness {
    bool stochastic = false;
    std::string event;
    std::size_t first = 0;   // transition index in the first automaton
    std::size_t second = 0;  // transition index in the second automaton
    std::string variable;
};

struct Compatibility {
    bool compatible = true;
    std::optional<CompatibilityWitness> witness;

    explicit operator bool() const noexcept { return compatible; }
};

/// Same-kind, same-event transitions must not assign one variable two
/// structurally different expressions.
[[nodiscard]] Compatibility reset_compatible(const Tdsha& first, const Tdsha& second);

/// The initial-point formulas must not assign one variable two different
/// expressions.
[[nodiscard]] bool init_compatible(const Tdsha& first, const Tdsha& second);

/// Conjunction of two resets; nullopt if they clash on a variable.
[[nodiscard]] std::optional<Reset> conjoin_resets(const Reset& first, const Reset& second);

/// The S-product. Throws ArgumentError unless S is a subset of both event
/// sets, CompileError on incompatibility or inconsistent rates.
[[nodiscard]] Tdsha product(const Tdsha& first, const Tdsha& second, const std::set<std::string>& sync);

/// Right-hand side of the ODE in one mode, one expression per variable.
struct CompiledField {
    int mode = 0;
    std::vector<Expr> rhs;
};

/// Sums s_j * f over the mode's flows in insertion order; variables with
/// no flow get the literal 0.
[[nodiscard]] CompiledField assemble_field(const Tdsha& automaton, int mode);

/// Keeps the modes reachable from the initial one along discrete edges,
/// ignoring guards. Surviving modes keep their relative order.
[[nodiscard]] Tdsha prune_unreachable(const Tdsha& automaton);

} // namespace hype
