#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hype/expr.hpp"
#include "hype/source.hpp"

namespace hype {

/// The distinguished event that selects initial modes and the initial point.
inline constexpr std::string_view kInitEvent = "init";

enum class EventKind : std::uint8_t { Instantaneous, Stochastic };

struct Parameter {
    std::string name;
    double value = 0.0;
    NodeSpan span;

    friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct VariableDecl {
    std::string name;
    NodeSpan span;

    friend bool operator==(const VariableDecl&, const VariableDecl&) = default;
};

/// Influence type definition, e.g. `type linear(x) = x`.
struct InfluenceType {
    std::string name;
    std::vector<std::string> formals;
    Expr body;
    NodeSpan span;

    friend bool operator==(const InfluenceType&, const InfluenceType&) = default;
};

/// Binds an influence name to the variable it drives (`iv h = K`).
struct InfluenceVariable {
    std::string influence;
    std::string variable;
    NodeSpan span;

    friend bool operator==(const InfluenceVariable&, const InfluenceVariable&) = default;
};

struct EventDecl {
    std::string name;
    EventKind kind = EventKind::Instantaneous;
    NodeSpan span;

    friend bool operator==(const EventDecl&, const EventDecl&) = default;
};

/// One conjunct `X' = value` of a reset or of an initial-point formula.
struct Assignment {
    std::string variable;
    Expr value;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Conjunction of assignments; empty means the identity reset `true`.
using Reset = std::vector<Assignment>;

struct EventCondition {
    EventKind kind = EventKind::Instantaneous;
    /// Boolean guard for instantaneous events, non-negative rate otherwise.
    Expr activation;
    Reset reset;

    friend bool operator==(const EventCondition&, const EventCondition&) = default;
};

struct EventConditionDecl {
    std::string event;
    EventCondition condition;
    NodeSpan span;

    friend bool operator==(const EventConditionDecl&, const EventConditionDecl&) = default;
};

/// Activity `(name, strength, type(arguments))`.
struct Influence {
    std::string name;
    Expr strength;
    std::string type;
    std::vector<std::string> arguments;

    friend bool operator==(const Influence&, const Influence&) = default;
};

[[nodiscard]] std::string to_string(const Influence& influence);

/// Summand `event:influence.Target(args)` of a subcomponent.
struct Branch {
    std::string event;
    Influence influence;
    std::string target;
    std::vector<std::string> target_arguments;
    NodeSpan span;

    friend bool operator==(const Branch&, const Branch&) = default;
};

struct Subcomponent {
    std::string name;
    std::vector<std::string> formals;
    std::vector<Branch> branches;
    NodeSpan span;

    friend bool operator==(const Subcomponent&, const Subcomponent&) = default;
};

/// Sequential controller term: `a.M | 0 | M + M | Name`.
class ControllerTerm {
  public:
    enum class Kind : std::uint8_t { Zero, Reference, Prefix, Choice };

    ControllerTerm();

    static ControllerTerm zero();
    static ControllerTerm reference(std::string name);
    static ControllerTerm prefix(std::string event, ControllerTerm continuation);
    static ControllerTerm choice(std::vector<ControllerTerm> summands);

    [[nodiscard]] Kind kind() const noexcept;
    /// Referenced controller for Reference, event for Prefix.
    [[nodiscard]] const std::string& name() const noexcept;
    /// Continuation for Prefix, summands for Choice.
    [[nodiscard]] const std::vector<ControllerTerm>& children() const noexcept;

    friend bool operator==(const ControllerTerm& lhs, const ControllerTerm& rhs);

  private:
    struct Node;
    explicit ControllerTerm(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Canonical text of a controller state: summands of (nested) choices are
/// flattened and sorted, so terms equal up to summand permutation share it.
[[nodiscard]] std::string canonical_form(const ControllerTerm& term);

struct SequentialController {
    std::string name;
    ControllerTerm body;
    NodeSpan span;

    friend bool operator==(const SequentialController&, const SequentialController&) = default;
};

/// Binary composition tree; leaves name subcomponents, systems or controllers.
class CompositionTree {
  public:
    CompositionTree();

    static CompositionTree leaf(std::string name, std::vector<std::string> arguments = {},
                                SourceSpan span = {});
    static CompositionTree sync(CompositionTree left, std::set<std::string> events,
                                CompositionTree right, SourceSpan span = {});

    [[nodiscard]] bool is_leaf() const noexcept;
    [[nodiscard]] const std::string& name() const noexcept;
    [[nodiscard]] const std::vector<std::string>& arguments() const noexcept;
    [[nodiscard]] const std::set<std::string>& events() const noexcept;
    [[nodiscard]] const CompositionTree& left() const;
    [[nodiscard]] const CompositionTree& right() const;
    [[nodiscard]] const SourceSpan& span() const noexcept;

    friend bool operator==(const CompositionTree& lhs, const CompositionTree& rhs);

  private:
    struct Node;
    explicit CompositionTree(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Named uncontrolled component: `system Sys = Heat sync{init} Shade`.
struct SystemDef {
    std::string name;
    CompositionTree tree;
    NodeSpan span;

    friend bool operator==(const SystemDef&, const SystemDef&) = default;
};

/// Named parallel controller: `controller Con = Con_h sync{} Con_d`.
struct ControllerComposition {
    std::string name;
    CompositionTree tree;
    NodeSpan span;

    friend bool operator==(const ControllerComposition&, const ControllerComposition&) = default;
};

/// `system Top = Sigma sync{L} init.Con`.
struct ControlledSystem {
    std::string name;
    CompositionTree uncontrolled;
    std::set<std::string> sync;
    CompositionTree controller;
    NodeSpan span;

    friend bool operator==(const ControlledSystem&, const ControlledSystem&) = default;
};

/// A stochastic HYPE model. Activities and the set of event conditions are
/// not stored separately; they are the influences occurring in subcomponents
/// and the range of the event-condition map.
struct HypeModel {
    std::string name;
    std::vector<Parameter> parameters;
    std::vector<VariableDecl> variables;
    std::vector<InfluenceType> influence_types;
    std::vector<InfluenceVariable> influence_variables;
    /// Declared events; `init` is implicit and instantaneous.
    std::vector<EventDecl> events;
    std::vector<EventConditionDecl> conditions;
    std::vector<Subcomponent> subcomponents;
    std::vector<SequentialController> controllers;
    std::vector<ControllerComposition> controller_compositions;
    std::vector<SystemDef> systems;
    std::optional<ControlledSystem> controlled;

    friend bool operator==(const HypeModel&, const HypeModel&) = default;

    [[nodiscard]] const Subcomponent* find_subcomponent(std::string_view name) const;
    [[nodiscard]] const SequentialController* find_controller(std::string_view name) const;
    [[nodiscard]] const ControllerComposition* find_controller_composition(std::string_view name) const;
    [[nodiscard]] const SystemDef* find_system(std::string_view name) const;
    [[nodiscard]] const InfluenceType* find_influence_type(std::string_view name) const;
    [[nodiscard]] const EventCondition* condition_of(std::string_view event) const;
    [[nodiscard]] std::optional<EventKind> event_kind(std::string_view event) const;
    [[nodiscard]] std::optional<std::string> variable_of(std::string_view influence) const;

    [[nodiscard]] std::vector<std::string> variable_names() const;
    /// E_d, starting with `init`, in declaration order.
    [[nodiscard]] std::vector<std::string> instantaneous_events() const;
    /// E_s in declaration order.
    [[nodiscard]] std::vector<std::string> stochastic_events() const;
    [[nodiscard]] std::map<std::string, double> parameter_values() const;

    /// Overrides a declared parameter; throws ArgumentError for unknown names.
    void set_parameter(std::string_view name, double value);
};

/// is(S): the distinct influences of a subcomponent, in branch order.
[[nodiscard]] std::vector<Influence> influences_of(const Subcomponent& subcomponent);

/// ev(S): the distinct non-init events of a subcomponent, in branch order.
[[nodiscard]] std::vector<std::string> events_of(const Subcomponent& subcomponent);

/// Resolves controller names to bodies; returns nullptr for unknown names.
using ControllerLookup = std::function<const ControllerTerm*(std::string_view)>;

[[nodiscard]] ControllerLookup controller_lookup(const HypeModel& model);

/// One-step successors `(a, M')` of every summand `a.M'` of a state.
/// Throws ModelError on unknown names or unguarded recursion.
[[nodiscard]] std::vector<std::pair<std::string, ControllerTerm>>
successors(const ControllerTerm& state, const ControllerLookup& lookup);

/// ds(M), in breadth-first discovery order, each state identified by its
/// canonical form. The first element is M itself.
[[nodiscard]] std::vector<ControllerTerm> derivative_set(const ControllerTerm& start,
                                                         const ControllerLookup& lookup);
[[nodiscard]] std::vector<ControllerTerm> derivative_set(const SequentialController& controller,
                                                         const HypeModel& model);

/// Events a sequential term can ever perform (closure over references).
[[nodiscard]] std::set<std::string> controller_events(const ControllerTerm& term,
                                                      const ControllerLookup& lookup);

enum class ViolationKind : std::uint8_t {
    DuplicateDefinition,
    UndeclaredName,
    MissingControlledSystem,
    NotSelfLooping,
    MissingInitBranch,
    DuplicateInitBranch,
    DuplicateEventBranch,
    InfluenceNotPrivate,
    MissingInfluenceVariable,
    InfluenceTypeArity,
    StrengthNotConstant,
    UncontrolledEvent,
    UnsynchronizedSharedEvent,
    ConditionKindMismatch,
    MissingEventCondition,
    DuplicateResetVariable,
    IllTypedExpression,
    UnguardedRecursion,
    InitInController,
    BadComposition,
};

struct Violation {
    ViolationKind kind;
    std::string message;
    SourceSpan span;
};

/// Checks well-definedness; an empty result means the model is valid.
[[nodiscard]] std::vector<Violation> validate(const HypeModel& model);

} // namespace hype
