#include "hype/compiler.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>

#include "hype/error.hpp"

namespace hype {

std::string to_string(PruneMode mode) {
    switch (mode) {
    case PruneMode::Final: return "final";
    case PruneMode::EachStage: return "each-stage";
    case PruneMode::Off: return "off";
    }
    return "?";
}

PruneMode parse_prune_mode(std::string_view text) {
    if (text == "final") return PruneMode::Final;
    if (text == "each-stage") return PruneMode::EachStage;
    if (text == "off") return PruneMode::Off;
    throw ArgumentError("unknown prune mode '" + std::string(text) + "' (use final, each-stage or off)");
}

namespace {

// Shared skeleton of every leaf automaton: X = V, E = E_d and E_s.
Tdsha empty_over(const HypeModel& model) {
    Tdsha t;
    t.variables = model.variable_names();
    const auto d = model.instantaneous_events();
    const auto s = model.stochastic_events();
    t.instantaneous_events.insert(d.begin(), d.end());
    t.stochastic_events.insert(s.begin(), s.end());
    t.parameters = model.parameter_values();
    return t;
}

const EventCondition& condition_for(const HypeModel& model, const std::string& event) {
    const EventCondition* condition = model.condition_of(event);
    if (condition == nullptr) {
        throw CompileError("event '" + event + "' has no event condition");
    }
    const auto kind = model.event_kind(event);
    if (!kind || *kind != condition->kind) {
        throw CompileError("event condition of '" + event + "' does not match the event's kind");
    }
    return *condition;
}

Influence instantiate(const Influence& influence, const std::map<std::string, std::string>& renaming) {
    Influence out = influence;
    for (auto& argument : out.arguments) {
        if (auto it = renaming.find(argument); it != renaming.end()) {
            argument = it->second;
        }
    }
    return out;
}

Expr influence_rate(const Influence& influence, const HypeModel& model) {
    const InfluenceType* type = model.find_influence_type(influence.type);
    if (type == nullptr) {
        throw CompileError("undeclared influence type '" + influence.type + "'");
    }
    if (type->formals.size() != influence.arguments.size()) {
        throw CompileError("influence type '" + influence.type + "' applied to the wrong number of arguments");
    }
    std::map<std::string, Expr> actuals;
    for (std::size_t i = 0; i < type->formals.size(); ++i) {
        actuals.emplace(type->formals[i], Expr::name(influence.arguments[i]));
    }
    return Expr::binary(Op::Mul, influence.strength, substitute(type->body, actuals));
}

std::size_t transition_count(const Tdsha& t) { return t.instantaneous.size() + t.stochastic.size(); }

// Product pipeline with stage bookkeeping.
class Pipeline {
  public:
    Pipeline(const HypeModel& model, PruneMode prune, CompileReport* report)
        : model_(model), prune_(prune), report_(report) {}

    Tdsha uncontrolled(const CompositionTree& tree) {
        if (tree.is_leaf()) {
            if (const auto* sub = model_.find_subcomponent(tree.name())) {
                return timed("subcomponent " + leaf_text(tree), [&] {
                    return compile_subcomponent(*sub, model_, &tree.arguments());
                }, false);
            }
            if (const auto* system = model_.find_system(tree.name())) {
                return uncontrolled(system->tree);
            }
            throw CompileError("'" + tree.name() + "' is not a subcomponent or uncontrolled system");
        }
        Tdsha left = uncontrolled(tree.left());
        Tdsha right = uncontrolled(tree.right());
        return combine(left, right, tree.events());
    }

    Tdsha controller(const CompositionTree& tree) {
        if (tree.is_leaf()) {
            if (const auto* seq = model_.find_controller(tree.name())) {
                return timed("controller " + seq->name, [&] { return compile_seq_controller(*seq, model_); }, false);
            }
            if (const auto* composition = model_.find_controller_composition(tree.name())) {
                return controller(composition->tree);
            }
            throw CompileError("'" + tree.name() + "' is not a controller");
        }
        Tdsha left = controller(tree.left());
        Tdsha right = controller(tree.right());
        return combine(left, right, tree.events());
    }

    Tdsha combine(const Tdsha& left, const Tdsha& right, const std::set<std::string>& sync) {
        std::string stage = "product over {";
        bool first = true;
        for (const auto& e : sync) {
            stage += (first ? "" : ", ") + e;
            first = false;
        }
        stage += "}";
        return timed(stage, [&] { return product(left, right, sync); }, prune_ == PruneMode::EachStage);
    }

  private:
    static std::string leaf_text(const CompositionTree& tree) {
        std::string out = tree.name();
        if (!tree.arguments().empty()) {
            out += '(';
            for (std::size_t i = 0; i < tree.arguments().size(); ++i) {
                out += (i ? ", " : "") + tree.arguments()[i];
            }
            out += ')';
        }
        return out;
    }

    template <typename Build>
    Tdsha timed(std::string stage, Build build, bool prune) {
        const auto start = std::chrono::steady_clock::now();
        Tdsha t = build();
        StageReport entry;
        entry.stage = std::move(stage);
        entry.modes_before = t.modes.size();
        if (prune) {
            t = prune_unreachable(t);
        }
        entry.modes_after = t.modes.size();
        entry.transitions = transition_count(t);
        entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (report_ != nullptr) {
            report_->stages.push_back(std::move(entry));
        }
        return t;
    }

    const HypeModel& model_;
    PruneMode prune_;
    CompileReport* report_;
};

} // namespace

Tdsha compile_subcomponent(const Subcomponent& sub, const HypeModel& model,
                           const std::vector<std::string>* arguments) {
    std::map<std::string, std::string> renaming;
    if (arguments != nullptr) {
        if (arguments->size() != sub.formals.size()) {
            throw CompileError("subcomponent '" + sub.name + "' instantiated with the wrong number of arguments");
        }
        for (std::size_t i = 0; i < sub.formals.size(); ++i) {
            renaming.emplace(sub.formals[i], (*arguments)[i]);
        }
    }

    Tdsha t = empty_over(model);
    const auto influences = influences_of(sub);
    std::vector<Influence> actual;
    for (const auto& influence : influences) {
        actual.push_back(instantiate(influence, renaming));
    }
    auto mode_of = [&](const Influence& influence) {
        return static_cast<int>(std::find(influences.begin(), influences.end(), influence) - influences.begin());
    };

    for (std::size_t m = 0; m < actual.size(); ++m) {
        const Influence& influence = actual[m];
        t.modes.push_back(ModeLabel::influence(to_string(influence)));
        const auto variable = model.variable_of(influence.name);
        if (!variable) {
            throw CompileError("influence name '" + influence.name + "' has no iv binding");
        }
        std::vector<double> unit(t.variables.size(), 0.0);
        auto index = t.variable_index(*variable);
        if (!index) {
            throw CompileError("influence '" + influence.name + "' drives undeclared variable '" + *variable + "'");
        }
        unit[*index] = 1.0;
        t.flows.push_back({static_cast<int>(m), std::move(unit), influence_rate(influence, model)});
    }

    bool has_init = false;
    for (const auto& branch : sub.branches) {
        if (branch.event == kInitEvent) {
            t.initial_mode = mode_of(branch.influence);
            has_init = true;
        }
    }
    if (!has_init) {
        throw CompileError("subcomponent '" + sub.name + "' has no init branch");
    }

    const auto events = events_of(sub);
    for (int source = 0; source < static_cast<int>(influences.size()); ++source) {
        for (const auto& event : events) {
            const auto branch = std::find_if(sub.branches.begin(), sub.branches.end(),
                                             [&](const Branch& b) { return b.event == event; });
            const int target = mode_of(branch->influence);
            const auto kind = model.event_kind(event);
            if (!kind) {
                throw CompileError("undeclared event '" + event + "'");
            }
            if (*kind == EventKind::Instantaneous) {
                t.instantaneous.push_back({source, target, Expr::boolean(true), {}, 1.0, event});
            } else {
                const EventCondition& condition = condition_for(model, event);
                t.stochastic.push_back({source, target, Expr::boolean(true), {}, condition.activation, event});
            }
        }
    }
    return t;
}

Tdsha compile_uncontrolled(const CompositionTree& tree, const HypeModel& model) {
    return Pipeline(model, PruneMode::Off, nullptr).uncontrolled(tree);
}

Tdsha compile_seq_controller(const SequentialController& controller, const HypeModel& model) {
    return compile_seq_controller(ControllerTerm::reference(controller.name), model);
}

Tdsha compile_seq_controller(const ControllerTerm& term, const HypeModel& model) {
    const auto lookup = controller_lookup(model);
    std::vector<ControllerTerm> states;
    try {
        states = derivative_set(term, lookup);
    } catch (const ModelError& e) {
        throw CompileError(e.what());
    }
    Tdsha t = empty_over(model);
    std::unordered_map<std::string, int> index;
    for (const auto& state : states) {
        const std::string key = canonical_form(state);
        index.emplace(key, static_cast<int>(t.modes.size()));
        t.modes.push_back(ModeLabel::controller(key));
    }
    t.initial_mode = 0;
    t.initial_point = condition_for(model, std::string(kInitEvent)).reset;

    std::set<std::tuple<int, int, std::string>> seen;
    for (std::size_t m = 0; m < states.size(); ++m) {
        const int source = static_cast<int>(m);
        for (const auto& [event, next] : successors(states[m], lookup)) {
            const int target = index.at(canonical_form(next));
            if (!seen.emplace(source, target, event).second) {
                continue; // a.M + a.M is one edge
            }
            const EventCondition& condition = condition_for(model, event);
            if (condition.kind == EventKind::Instantaneous) {
                t.instantaneous.push_back({source, target, condition.activation, condition.reset, 1.0, event});
            } else {
                t.stochastic.push_back(
                    {source, target, Expr::boolean(true), condition.reset, condition.activation, event});
            }
        }
    }
    return t;
}

Tdsha compile_controller(const CompositionTree& tree, const HypeModel& model) {
    return Pipeline(model, PruneMode::Off, nullptr).controller(tree);
}

Compilation compile(const HypeModel& model, const CompileOptions& options) {
    const auto violations = validate(model);
    if (!violations.empty()) {
        std::string message = "model is not well defined:";
        for (const auto& v : violations) {
            message += "\n  " + v.span.to_string() + ": " + v.message;
        }
        throw CompileError(message);
    }
    const auto& top = *model.controlled;

    Compilation out;
    Pipeline pipeline(model, options.prune, &out.report);
    Tdsha sigma = pipeline.uncontrolled(top.uncontrolled);
    Tdsha con = pipeline.controller(top.controller);
    Tdsha full;
    try {
        full = pipeline.combine(sigma, con, top.sync);
    } catch (const CompileError& e) {
        throw CompileError("controlled system '" + top.name + "': " + e.what());
    }
    out.report.stages.back().stage = "system " + top.name;

    out.report.modes_before_prune = full.modes.size();
    if (options.prune == PruneMode::Final) {
        full = prune_unreachable(full);
        out.report.stages.back().modes_after = full.modes.size();
        out.report.stages.back().transitions = transition_count(full);
    }
    out.report.modes_after_prune = full.modes.size();
    check_well_formed(full);

    for (const auto& variable : full.defaulted_variables()) {
        out.report.warnings.push_back("variable '" + variable + "' is not assigned by init; it starts at 0");
    }
    out.automaton = std::move(full);
    return out;
}

} // namespace hype
