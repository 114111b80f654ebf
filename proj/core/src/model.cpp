#include "hype/model.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "hype/error.hpp"

namespace hype {

std::string SourceSpan::to_string() const {
    std::string out = file.empty() ? std::string("<input>") : file;
    out += ':' + std::to_string(line) + ':' + std::to_string(column);
    return out;
}

std::string to_string(const Influence& influence) {
    std::string out = "(" + influence.name + ", " + hype::to_string(influence.strength) + ", " +
                      influence.type;
    if (!influence.arguments.empty()) {
        out += '(';
        for (std::size_t i = 0; i < influence.arguments.size(); ++i) {
            out += (i ? ", " : "") + influence.arguments[i];
        }
        out += ')';
    }
    return out + ")";
}

// ---------------------------------------------------------------------------
// ControllerTerm

struct ControllerTerm::Node {
    Kind kind = Kind::Zero;
    std::string name;
    std::vector<ControllerTerm> children;
};

ControllerTerm::ControllerTerm() : node_(std::make_shared<Node>()) {}

ControllerTerm ControllerTerm::zero() { return ControllerTerm(); }

ControllerTerm ControllerTerm::reference(std::string name) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::Reference;
    node->name = std::move(name);
    return ControllerTerm(std::move(node));
}

ControllerTerm ControllerTerm::prefix(std::string event, ControllerTerm continuation) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::Prefix;
    node->name = std::move(event);
    node->children.push_back(std::move(continuation));
    return ControllerTerm(std::move(node));
}

ControllerTerm ControllerTerm::choice(std::vector<ControllerTerm> summands) {
    if (summands.size() == 1) {
        return summands.front();
    }
    auto node = std::make_shared<Node>();
    node->kind = Kind::Choice;
    node->children = std::move(summands);
    return ControllerTerm(std::move(node));
}

ControllerTerm::Kind ControllerTerm::kind() const noexcept { return node_->kind; }
const std::string& ControllerTerm::name() const noexcept { return node_->name; }
const std::vector<ControllerTerm>& ControllerTerm::children() const noexcept { return node_->children; }

bool operator==(const ControllerTerm& lhs, const ControllerTerm& rhs) {
    return lhs.node_ == rhs.node_ ||
           (lhs.node_->kind == rhs.node_->kind && lhs.node_->name == rhs.node_->name &&
            lhs.node_->children == rhs.node_->children);
}

namespace {

void flatten_summands(const ControllerTerm& term, std::vector<std::string>& out) {
    if (term.kind() == ControllerTerm::Kind::Choice) {
        for (const auto& child : term.children()) {
            flatten_summands(child, out);
        }
    } else {
        out.push_back(canonical_form(term));
    }
}

} // namespace

std::string canonical_form(const ControllerTerm& term) {
    switch (term.kind()) {
    case ControllerTerm::Kind::Zero:
        return "0";
    case ControllerTerm::Kind::Reference:
        return term.name();
    case ControllerTerm::Kind::Prefix: {
        const auto& next = term.children().front();
        std::string inner = canonical_form(next);
        if (next.kind() == ControllerTerm::Kind::Choice) {
            inner = "(" + inner + ")";
        }
        return term.name() + "." + inner;
    }
    case ControllerTerm::Kind::Choice: {
        std::vector<std::string> parts;
        flatten_summands(term, parts);
        std::sort(parts.begin(), parts.end());
        std::string out;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            out += (i ? " + " : "") + parts[i];
        }
        return out;
    }
    }
    return {};
}

// ---------------------------------------------------------------------------
// CompositionTree

struct CompositionTree::Node {
    bool leaf = true;
    std::string name;
    std::vector<std::string> arguments;
    std::set<std::string> events;
    std::vector<CompositionTree> operands;
    SourceSpan span;
};

CompositionTree::CompositionTree() : node_(std::make_shared<Node>()) {}

CompositionTree CompositionTree::leaf(std::string name, std::vector<std::string> arguments,
                                      SourceSpan span) {
    auto node = std::make_shared<Node>();
    node->name = std::move(name);
    node->arguments = std::move(arguments);
    node->span = std::move(span);
    return CompositionTree(std::move(node));
}

CompositionTree CompositionTree::sync(CompositionTree left, std::set<std::string> events,
                                      CompositionTree right, SourceSpan span) {
    auto node = std::make_shared<Node>();
    node->leaf = false;
    node->events = std::move(events);
    node->operands = {std::move(left), std::move(right)};
    node->span = std::move(span);
    return CompositionTree(std::move(node));
}

bool CompositionTree::is_leaf() const noexcept { return node_->leaf; }
const std::string& CompositionTree::name() const noexcept { return node_->name; }
const std::vector<std::string>& CompositionTree::arguments() const noexcept { return node_->arguments; }
const std::set<std::string>& CompositionTree::events() const noexcept { return node_->events; }
const SourceSpan& CompositionTree::span() const noexcept { return node_->span; }

const CompositionTree& CompositionTree::left() const {
    if (node_->leaf) {
        throw ArgumentError("leaf has no operands");
    }
    return node_->operands[0];
}

const CompositionTree& CompositionTree::right() const {
    if (node_->leaf) {
        throw ArgumentError("leaf has no operands");
    }
    return node_->operands[1];
}

bool operator==(const CompositionTree& lhs, const CompositionTree& rhs) {
    if (lhs.node_ == rhs.node_) {
        return true;
    }
    const auto& a = *lhs.node_;
    const auto& b = *rhs.node_;
    if (a.leaf != b.leaf) {
        return false;
    }
    if (a.leaf) {
        return a.name == b.name && a.arguments == b.arguments;
    }
    return a.events == b.events && lhs.left() == rhs.left() && lhs.right() == rhs.right();
}

// ---------------------------------------------------------------------------
// HypeModel lookups

namespace {

template <typename Range>
auto find_named(const Range& range, std::string_view name) -> decltype(&*range.begin()) {
    for (const auto& item : range) {
        if (item.name == name) {
            return &item;
        }
    }
    return nullptr;
}

} // namespace

const Subcomponent* HypeModel::find_subcomponent(std::string_view n) const { return find_named(subcomponents, n); }
const SequentialController* HypeModel::find_controller(std::string_view n) const { return find_named(controllers, n); }
const ControllerComposition* HypeModel::find_controller_composition(std::string_view n) const {
    return find_named(controller_compositions, n);
}
const SystemDef* HypeModel::find_system(std::string_view n) const { return find_named(systems, n); }
const InfluenceType* HypeModel::find_influence_type(std::string_view n) const { return find_named(influence_types, n); }

const EventCondition* HypeModel::condition_of(std::string_view event) const {
    for (const auto& decl : conditions) {
        if (decl.event == event) {
            return &decl.condition;
        }
    }
    return nullptr;
}

std::optional<EventKind> HypeModel::event_kind(std::string_view event) const {
    if (event == kInitEvent) {
        return EventKind::Instantaneous;
    }
    if (const auto* decl = find_named(events, event)) {
        return decl->kind;
    }
    return std::nullopt;
}

std::optional<std::string> HypeModel::variable_of(std::string_view influence) const {
    for (const auto& binding : influence_variables) {
        if (binding.influence == influence) {
            return binding.variable;
        }
    }
    return std::nullopt;
}

std::vector<std::string> HypeModel::variable_names() const {
    std::vector<std::string> out;
    for (const auto& v : variables) {
        out.push_back(v.name);
    }
    return out;
}

std::vector<std::string> HypeModel::instantaneous_events() const {
    std::vector<std::string> out{std::string(kInitEvent)};
    for (const auto& e : events) {
        if (e.kind == EventKind::Instantaneous) {
            out.push_back(e.name);
        }
    }
    return out;
}

std::vector<std::string> HypeModel::stochastic_events() const {
    std::vector<std::string> out;
    for (const auto& e : events) {
        if (e.kind == EventKind::Stochastic) {
            out.push_back(e.name);
        }
    }
    return out;
}

std::map<std::string, double> HypeModel::parameter_values() const {
    std::map<std::string, double> out;
    for (const auto& p : parameters) {
        out[p.name] = p.value;
    }
    return out;
}

void HypeModel::set_parameter(std::string_view name, double value) {
    for (auto& p : parameters) {
        if (p.name == name) {
            p.value = value;
            return;
        }
    }
    throw ArgumentError("no parameter named '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Structural queries

std::vector<Influence> influences_of(const Subcomponent& subcomponent) {
    std::vector<Influence> out;
    for (const auto& branch : subcomponent.branches) {
        if (std::find(out.begin(), out.end(), branch.influence) == out.end()) {
            out.push_back(branch.influence);
        }
    }
    return out;
}

std::vector<std::string> events_of(const Subcomponent& subcomponent) {
    std::vector<std::string> out;
    for (const auto& branch : subcomponent.branches) {
        if (branch.event != kInitEvent &&
            std::find(out.begin(), out.end(), branch.event) == out.end()) {
            out.push_back(branch.event);
        }
    }
    return out;
}

ControllerLookup controller_lookup(const HypeModel& model) {
    return [&model](std::string_view name) -> const ControllerTerm* {
        const auto* controller = model.find_controller(name);
        return controller ? &controller->body : nullptr;
    };
}

namespace {

void collect_successors(const ControllerTerm& term, const ControllerLookup& lookup,
                        std::vector<std::string>& unfolding,
                        std::vector<std::pair<std::string, ControllerTerm>>& out) {
    switch (term.kind()) {
    case ControllerTerm::Kind::Zero:
        return;
    case ControllerTerm::Kind::Prefix:
        out.emplace_back(term.name(), term.children().front());
        return;
    case ControllerTerm::Kind::Choice:
        for (const auto& child : term.children()) {
            collect_successors(child, lookup, unfolding, out);
        }
        return;
    case ControllerTerm::Kind::Reference: {
        if (std::find(unfolding.begin(), unfolding.end(), term.name()) != unfolding.end()) {
            throw ModelError("unguarded recursion through controller '" + term.name() + "'");
        }
        const ControllerTerm* body = lookup(term.name());
        if (body == nullptr) {
            throw ModelError("unresolved controller '" + term.name() + "'");
        }
        unfolding.push_back(term.name());
        collect_successors(*body, lookup, unfolding, out);
        unfolding.pop_back();
        return;
    }
    }
}

} // namespace

std::vector<std::pair<std::string, ControllerTerm>> successors(const ControllerTerm& state,
                                                               const ControllerLookup& lookup) {
    std::vector<std::pair<std::string, ControllerTerm>> out;
    std::vector<std::string> unfolding;
    collect_successors(state, lookup, unfolding, out);
    return out;
}

std::vector<ControllerTerm> derivative_set(const ControllerTerm& start, const ControllerLookup& lookup) {
    std::vector<ControllerTerm> states;
    std::unordered_set<std::string> seen;
    std::deque<ControllerTerm> frontier{start};
    seen.insert(canonical_form(start));
    while (!frontier.empty()) {
        ControllerTerm state = frontier.front();
        frontier.pop_front();
        for (auto& [event, next] : successors(state, lookup)) {
            if (seen.insert(canonical_form(next)).second) {
                frontier.push_back(next);
            }
        }
        states.push_back(std::move(state));
    }
    return states;
}

std::vector<ControllerTerm> derivative_set(const SequentialController& controller, const HypeModel& model) {
    return derivative_set(ControllerTerm::reference(controller.name), controller_lookup(model));
}

std::set<std::string> controller_events(const ControllerTerm& term, const ControllerLookup& lookup) {
    std::set<std::string> out;
    for (const auto& state : derivative_set(term, lookup)) {
        for (const auto& [event, next] : successors(state, lookup)) {
            out.insert(event);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Validator {
  public:
    explicit Validator(const HypeModel& model) : model_(model), lookup_(controller_lookup(model)) {}

    std::vector<Violation> run() {
        check_definitions();
        check_influence_types();
        check_events();
        check_subcomponents();
        check_controllers();
        for (const auto& system : model_.systems) {
            std::vector<std::string> stack{system.name};
            check_uncontrolled_tree(system.tree, stack);
        }
        for (const auto& composition : model_.controller_compositions) {
            std::vector<std::string> stack{composition.name};
            check_controller_tree(composition.tree, stack);
        }
        check_controlled_system();
        return std::move(violations_);
    }

  private:
    void report(ViolationKind kind, std::string message, const SourceSpan& span) {
        violations_.push_back({kind, std::move(message), span});
    }

    bool is_variable(const std::string& name) const {
        return std::any_of(model_.variables.begin(), model_.variables.end(),
                           [&](const VariableDecl& v) { return v.name == name; });
    }

    bool is_parameter(const std::string& name) const {
        return std::any_of(model_.parameters.begin(), model_.parameters.end(),
                           [&](const Parameter& p) { return p.name == name; });
    }

    void check_definitions() {
        std::unordered_map<std::string, std::string> owner{{std::string(kInitEvent), "event"}};
        auto define = [&](const std::string& name, const char* what, const SourceSpan& span) {
            auto [it, fresh] = owner.emplace(name, what);
            if (!fresh) {
                report(ViolationKind::DuplicateDefinition,
                       "duplicate definition of '" + name + "' (already a " + it->second + ")", span);
            }
        };
        for (const auto& p : model_.parameters) define(p.name, "parameter", p.span.value);
        for (const auto& v : model_.variables) define(v.name, "variable", v.span.value);
        for (const auto& t : model_.influence_types) define(t.name, "influence type", t.span.value);
        for (const auto& b : model_.influence_variables) define(b.influence, "influence name", b.span.value);
        for (const auto& e : model_.events) define(e.name, "event", e.span.value);
        for (const auto& s : model_.subcomponents) define(s.name, "subcomponent", s.span.value);
        for (const auto& c : model_.controllers) define(c.name, "controller", c.span.value);
        for (const auto& c : model_.controller_compositions) define(c.name, "controller", c.span.value);
        for (const auto& s : model_.systems) define(s.name, "system", s.span.value);
        if (model_.controlled) {
            define(model_.controlled->name, "system", model_.controlled->span.value);
        }

        std::set<std::string> with_condition;
        for (const auto& decl : model_.conditions) {
            if (!with_condition.insert(decl.event).second) {
                report(ViolationKind::DuplicateDefinition,
                       "duplicate event condition for '" + decl.event + "'", decl.span.value);
            }
        }
        for (const auto& binding : model_.influence_variables) {
            if (!is_variable(binding.variable)) {
                report(ViolationKind::UndeclaredName,
                       "influence '" + binding.influence + "' drives undeclared variable '" +
                           binding.variable + "'",
                       binding.span.value);
            }
        }
    }

    void check_influence_types() {
        for (const auto& type : model_.influence_types) {
            for (const auto& name : names_of(type.body)) {
                const bool formal =
                    std::find(type.formals.begin(), type.formals.end(), name) != type.formals.end();
                if (!formal && !is_parameter(name)) {
                    report(ViolationKind::UndeclaredName,
                           "influence type '" + type.name + "' uses undeclared name '" + name + "'",
                           type.span.value);
                }
            }
            check_type(type.body, ValueType::Real, "influence type '" + type.name + "'", type.span.value);
        }
    }

    bool check_type(const Expr& expr, ValueType wanted, const std::string& context, const SourceSpan& span) {
        try {
            if (infer_type(expr) != wanted) {
                report(ViolationKind::IllTypedExpression,
                       context + " must be " + (wanted == ValueType::Real ? "real" : "boolean"), span);
                return false;
            }
        } catch (const EvalError& e) {
            report(ViolationKind::IllTypedExpression, context + ": " + e.what(), span);
            return false;
        }
        return true;
    }

    void check_state_names(const Expr& expr, const std::string& context, const SourceSpan& span) {
        for (const auto& name : names_of(expr)) {
            if (!is_variable(name) && !is_parameter(name)) {
                report(ViolationKind::UndeclaredName, context + " uses undeclared name '" + name + "'", span);
            }
        }
    }

    void check_events() {
        for (const auto& decl : model_.conditions) {
            const auto& span = decl.span.value;
            const auto kind = model_.event_kind(decl.event);
            if (!kind) {
                report(ViolationKind::UndeclaredName, "event condition for undeclared event '" + decl.event + "'",
                       span);
                continue;
            }
            const auto& condition = decl.condition;
            const std::string context = "event condition of '" + decl.event + "'";
            if (condition.kind != *kind) {
                report(ViolationKind::ConditionKindMismatch,
                       context + " is marked " +
                           (condition.kind == EventKind::Stochastic ? "stochastic" : "instantaneous") +
                           " but the event is not",
                       span);
            }
            check_state_names(condition.activation, context, span);
            try {
                const ValueType type = infer_type(condition.activation);
                if (*kind == EventKind::Instantaneous && type == ValueType::Real) {
                    report(ViolationKind::ConditionKindMismatch,
                           "rate expression attached to instantaneous event '" + decl.event + "'", span);
                } else if (*kind == EventKind::Stochastic && type == ValueType::Bool) {
                    report(ViolationKind::ConditionKindMismatch,
                           "guard attached to stochastic event '" + decl.event + "'", span);
                }
            } catch (const EvalError& e) {
                report(ViolationKind::IllTypedExpression, context + ": " + e.what(), span);
            }
            check_reset(condition.reset, context, span);
        }
        if (model_.condition_of(kInitEvent) == nullptr) {
            report(ViolationKind::MissingEventCondition, "event 'init' has no event condition", {});
        }
        for (const auto& event : model_.events) {
            if (model_.condition_of(event.name) == nullptr) {
                report(ViolationKind::MissingEventCondition, "event '" + event.name + "' has no event condition",
                       event.span.value);
            }
        }
    }

    void check_reset(const Reset& reset, const std::string& context, const SourceSpan& span) {
        std::set<std::string> assigned;
        for (const auto& assignment : reset) {
            if (!is_variable(assignment.variable)) {
                report(ViolationKind::UndeclaredName,
                       context + " resets undeclared variable '" + assignment.variable + "'", span);
            }
            if (!assigned.insert(assignment.variable).second) {
                report(ViolationKind::DuplicateResetVariable,
                       context + " resets '" + assignment.variable + "' twice", span);
            }
            check_state_names(assignment.value, context, span);
            check_type(assignment.value, ValueType::Real, context + " reset of '" + assignment.variable + "'",
                       span);
        }
    }

    void check_subcomponents() {
        std::unordered_map<std::string, std::string> influence_owner;
        for (const auto& sub : model_.subcomponents) {
            const auto& span = sub.span.value;
            std::size_t init_branches = 0;
            std::set<std::string> seen_events;
            std::set<std::string> influence_names;
            for (const auto& branch : sub.branches) {
                const auto& bspan = branch.span.value;
                if (branch.target != sub.name || branch.target_arguments != sub.formals) {
                    report(ViolationKind::NotSelfLooping,
                           "subcomponent '" + sub.name + "' is not self-looping: branch on '" + branch.event +
                               "' continues as '" + branch.target + "'",
                           bspan);
                }
                if (branch.event == kInitEvent) {
                    ++init_branches;
                } else if (!model_.event_kind(branch.event)) {
                    report(ViolationKind::UndeclaredName, "undeclared event '" + branch.event + "'", bspan);
                } else if (!seen_events.insert(branch.event).second) {
                    report(ViolationKind::DuplicateEventBranch,
                           "subcomponent '" + sub.name + "' reacts to '" + branch.event + "' more than once", bspan);
                }
                check_influence(sub, branch.influence, bspan);
                influence_names.insert(branch.influence.name);
            }
            if (init_branches == 0) {
                report(ViolationKind::MissingInitBranch, "subcomponent '" + sub.name + "' has no init branch", span);
            } else if (init_branches > 1) {
                report(ViolationKind::DuplicateInitBranch,
                       "subcomponent '" + sub.name + "' has more than one init branch", span);
            }
            if (influence_names.size() > 1) {
                report(ViolationKind::InfluenceNotPrivate,
                       "subcomponent '" + sub.name + "' uses more than one influence name", span);
            }
            for (const auto& name : influence_names) {
                auto [it, fresh] = influence_owner.emplace(name, sub.name);
                if (!fresh) {
                    report(ViolationKind::InfluenceNotPrivate,
                           "influence name not private: '" + name + "' appears in '" + it->second + "' and '" +
                               sub.name + "'",
                           span);
                }
            }
        }
    }

    void check_influence(const Subcomponent& sub, const Influence& influence, const SourceSpan& span) {
        if (!model_.variable_of(influence.name)) {
            report(ViolationKind::MissingInfluenceVariable,
                   "influence name '" + influence.name + "' has no iv binding", span);
        }
        for (const auto& name : names_of(influence.strength)) {
            if (!is_parameter(name)) {
                report(ViolationKind::StrengthNotConstant,
                       "influence strength may only use parameters, found '" + name + "'", span);
            }
        }
        check_type(influence.strength, ValueType::Real, "influence strength", span);
        const auto* type = model_.find_influence_type(influence.type);
        if (type == nullptr) {
            report(ViolationKind::UndeclaredName, "undeclared influence type '" + influence.type + "'", span);
            return;
        }
        if (type->formals.size() != influence.arguments.size()) {
            report(ViolationKind::InfluenceTypeArity,
                   "influence type '" + influence.type + "' expects " + std::to_string(type->formals.size()) +
                       " argument(s), got " + std::to_string(influence.arguments.size()),
                   span);
        }
        for (const auto& argument : influence.arguments) {
            const bool formal = std::find(sub.formals.begin(), sub.formals.end(), argument) != sub.formals.end();
            if (!formal && !is_variable(argument)) {
                report(ViolationKind::UndeclaredName, "influence argument '" + argument + "' is not a variable", span);
            }
        }
    }

    void check_controllers() {
        for (const auto& controller : model_.controllers) {
            const auto& span = controller.span.value;
            try {
                for (const auto& state : derivative_set(ControllerTerm::reference(controller.name), lookup_)) {
                    for (const auto& [event, next] : successors(state, lookup_)) {
                        if (event == kInitEvent) {
                            report(ViolationKind::InitInController,
                                   "controller '" + controller.name + "' performs 'init'", span);
                        } else if (!model_.event_kind(event)) {
                            report(ViolationKind::UndeclaredName,
                                   "controller '" + controller.name + "' uses undeclared event '" + event + "'", span);
                        }
                    }
                }
            } catch (const ModelError& e) {
                const bool unguarded = std::string_view(e.what()).starts_with("unguarded");
                report(unguarded ? ViolationKind::UnguardedRecursion : ViolationKind::UndeclaredName,
                       "controller '" + controller.name + "': " + e.what(), span);
            }
        }
    }

    void check_sync_events(const CompositionTree& tree) {
        for (const auto& event : tree.events()) {
            if (!model_.event_kind(event)) {
                report(ViolationKind::UndeclaredName, "synchronization on undeclared event '" + event + "'",
                       tree.span());
            }
        }
    }

    // Returns the events the component can take part in, or nullopt on error.
    std::optional<std::set<std::string>> check_uncontrolled_tree(const CompositionTree& tree,
                                                                 std::vector<std::string>& stack) {
        if (tree.is_leaf()) {
            if (const auto* sub = model_.find_subcomponent(tree.name())) {
                if (tree.arguments().size() != sub->formals.size()) {
                    report(ViolationKind::BadComposition,
                           "subcomponent '" + sub->name + "' expects " + std::to_string(sub->formals.size()) +
                               " argument(s)",
                           tree.span());
                }
                for (const auto& argument : tree.arguments()) {
                    if (!is_variable(argument)) {
                        report(ViolationKind::UndeclaredName, "argument '" + argument + "' is not a variable",
                               tree.span());
                    }
                }
                auto events = events_of(*sub);
                std::set<std::string> out(events.begin(), events.end());
                out.insert(std::string(kInitEvent));
                return out;
            }
            if (const auto* system = model_.find_system(tree.name())) {
                if (std::find(stack.begin(), stack.end(), system->name) != stack.end()) {
                    report(ViolationKind::BadComposition, "system '" + system->name + "' is defined in terms of itself",
                           tree.span());
                    return std::nullopt;
                }
                stack.push_back(system->name);
                auto out = check_uncontrolled_tree(system->tree, stack);
                stack.pop_back();
                return out;
            }
            report(ViolationKind::UndeclaredName,
                   "'" + tree.name() + "' is not a subcomponent or uncontrolled system", tree.span());
            return std::nullopt;
        }
        check_sync_events(tree);
        auto left = check_uncontrolled_tree(tree.left(), stack);
        auto right = check_uncontrolled_tree(tree.right(), stack);
        if (!left || !right) {
            return std::nullopt;
        }
        return check_shared(*left, *right, tree.events(), tree.span());
    }

    std::optional<std::set<std::string>> check_controller_tree(const CompositionTree& tree,
                                                               std::vector<std::string>& stack) {
        if (tree.is_leaf()) {
            if (!tree.arguments().empty()) {
                report(ViolationKind::BadComposition, "controllers take no arguments", tree.span());
            }
            if (model_.find_controller(tree.name()) != nullptr) {
                try {
                    return controller_events(ControllerTerm::reference(tree.name()), lookup_);
                } catch (const ModelError&) {
                    return std::nullopt; // already reported by check_controllers
                }
            }
            if (const auto* composition = model_.find_controller_composition(tree.name())) {
                if (std::find(stack.begin(), stack.end(), composition->name) != stack.end()) {
                    report(ViolationKind::BadComposition,
                           "controller '" + composition->name + "' is defined in terms of itself", tree.span());
                    return std::nullopt;
                }
                stack.push_back(composition->name);
                auto out = check_controller_tree(composition->tree, stack);
                stack.pop_back();
                return out;
            }
            report(ViolationKind::UndeclaredName, "'" + tree.name() + "' is not a controller", tree.span());
            return std::nullopt;
        }
        check_sync_events(tree);
        auto left = check_controller_tree(tree.left(), stack);
        auto right = check_controller_tree(tree.right(), stack);
        if (!left || !right) {
            return std::nullopt;
        }
        return check_shared(*left, *right, tree.events(), tree.span());
    }

    std::set<std::string> check_shared(const std::set<std::string>& left, const std::set<std::string>& right,
                                       const std::set<std::string>& sync, const SourceSpan& span) {
        std::set<std::string> out = left;
        for (const auto& event : right) {
            if (left.contains(event) && !sync.contains(event)) {
                report(ViolationKind::UnsynchronizedSharedEvent,
                       "shared event '" + event + "' absent from synchronization set", span);
            }
            out.insert(event);
        }
        return out;
    }

    void collect_instances(const CompositionTree& tree, std::vector<std::string>& stack,
                           std::map<std::string, int>& count) {
        if (!tree.is_leaf()) {
            collect_instances(tree.left(), stack, count);
            collect_instances(tree.right(), stack, count);
            return;
        }
        if (model_.find_subcomponent(tree.name())) {
            ++count[tree.name()];
        } else if (const auto* system = model_.find_system(tree.name())) {
            if (std::find(stack.begin(), stack.end(), system->name) == stack.end()) {
                stack.push_back(system->name);
                collect_instances(system->tree, stack, count);
                stack.pop_back();
            }
        }
    }

    void check_controlled_system() {
        if (!model_.controlled) {
            report(ViolationKind::MissingControlledSystem, "model has no controlled system (`Sigma sync{L} init.Con`)",
                   {});
            return;
        }
        const auto& top = *model_.controlled;
        const auto& span = top.span.value;
        std::vector<std::string> stack{top.name};
        auto sigma = check_uncontrolled_tree(top.uncontrolled, stack);
        stack = {top.name};
        auto con = check_controller_tree(top.controller, stack);
        for (const auto& event : top.sync) {
            if (!model_.event_kind(event)) {
                report(ViolationKind::UndeclaredName, "synchronization on undeclared event '" + event + "'", span);
            }
        }
        std::map<std::string, int> instances;
        stack = {top.name};
        collect_instances(top.uncontrolled, stack, instances);
        for (const auto& [name, count] : instances) {
            if (count > 1) {
                report(ViolationKind::InfluenceNotPrivate,
                       "influence name not private: subcomponent '" + name + "' is instantiated " +
                           std::to_string(count) + " times",
                       span);
            }
        }
        if (!sigma || !con) {
            return;
        }
        for (const auto& event : *sigma) {
            if (event != kInitEvent && !con->contains(event)) {
                report(ViolationKind::UncontrolledEvent, "uncontrolled event '" + event + "' does not appear in the controller",
                       span);
            }
        }
        auto controller_side = *con;
        controller_side.insert(std::string(kInitEvent));
        check_shared(*sigma, controller_side, top.sync, span);
    }

    const HypeModel& model_;
    ControllerLookup lookup_;
    std::vector<Violation> violations_;
};

} // namespace

std::vector<Violation> validate(const HypeModel& model) { return Validator(model).run(); }

} // namespace hype
