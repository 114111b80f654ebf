#include "hype/tdsha.hpp"

#include <algorithm>
#include <deque>

#include "hype/error.hpp"

namespace hype {

struct ModeLabel::Node {
    Kind kind = Kind::Unit;
    std::string text;
    std::vector<ModeLabel> parts;
};

ModeLabel::ModeLabel() : node_(std::make_shared<Node>(Node{Kind::Unit, "unit", {}})) {}

ModeLabel ModeLabel::influence(std::string text) {
    return ModeLabel(std::make_shared<Node>(Node{Kind::Influence, std::move(text), {}}));
}

ModeLabel ModeLabel::controller(std::string text) {
    return ModeLabel(std::make_shared<Node>(Node{Kind::Controller, std::move(text), {}}));
}

ModeLabel ModeLabel::unit() { return ModeLabel(); }

ModeLabel ModeLabel::pair(ModeLabel left, ModeLabel right) {
    return ModeLabel(std::make_shared<Node>(Node{Kind::Pair, {}, {std::move(left), std::move(right)}}));
}

ModeLabel::Kind ModeLabel::kind() const noexcept { return node_->kind; }
const std::string& ModeLabel::text() const noexcept { return node_->text; }

const ModeLabel& ModeLabel::left() const {
    if (node_->kind != Kind::Pair) {
        throw ArgumentError("mode label is not a pair");
    }
    return node_->parts[0];
}

const ModeLabel& ModeLabel::right() const {
    if (node_->kind != Kind::Pair) {
        throw ArgumentError("mode label is not a pair");
    }
    return node_->parts[1];
}

std::string ModeLabel::to_string() const {
    if (node_->kind != Kind::Pair) {
        return node_->text;
    }
    return "(" + left().to_string() + ", " + right().to_string() + ")";
}

bool operator==(const ModeLabel& lhs, const ModeLabel& rhs) {
    return lhs.node_ == rhs.node_ || (lhs.node_->kind == rhs.node_->kind && lhs.node_->text == rhs.node_->text &&
                                      lhs.node_->parts == rhs.node_->parts);
}

// ---------------------------------------------------------------------------

Tdsha Tdsha::unit() {
    Tdsha t;
    t.modes.push_back(ModeLabel::unit());
    return t;
}

std::optional<int> Tdsha::find_mode(const std::string& label) const {
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].to_string() == label) {
            return static_cast<int>(i);
        }
    }
    return std::nullopt;
}

std::optional<int> Tdsha::variable_index(const std::string& name) const {
    auto it = std::find(variables.begin(), variables.end(), name);
    if (it == variables.end()) {
        return std::nullopt;
    }
    return static_cast<int>(it - variables.begin());
}

std::set<std::string> Tdsha::events() const {
    std::set<std::string> out = instantaneous_events;
    out.insert(stochastic_events.begin(), stochastic_events.end());
    return out;
}

std::vector<double> Tdsha::initial_state() const {
    std::vector<double> state(variables.size(), 0.0);
    Valuation valuation;
    for (const auto& [name, value] : parameters) {
        valuation.set(name, value);
    }
    for (const auto& v : variables) {
        valuation.set(v, 0.0);
    }
    for (const auto& assignment : initial_point) {
        auto index = variable_index(assignment.variable);
        if (!index) {
            throw EvalError("initial point assigns unknown variable '" + assignment.variable + "'");
        }
        state[*index] = eval_real(assignment.value, valuation);
    }
    return state;
}

std::vector<std::string> Tdsha::defaulted_variables() const {
    std::vector<std::string> out;
    for (const auto& v : variables) {
        const bool assigned = std::any_of(initial_point.begin(), initial_point.end(),
                                          [&](const Assignment& a) { return a.variable == v; });
        if (!assigned) {
            out.push_back(v);
        }
    }
    return out;
}

namespace {

template <typename Transition>
void check_endpoints(const Tdsha& t, const std::vector<Transition>& transitions, const char* what) {
    const int n = static_cast<int>(t.modes.size());
    for (const auto& tr : transitions) {
        if (tr.source < 0 || tr.source >= n || tr.target < 0 || tr.target >= n) {
            throw CompileError(std::string(what) + " transition on '" + tr.event + "' has an endpoint outside Q");
        }
    }
}

} // namespace

void check_well_formed(const Tdsha& t) {
    const int n = static_cast<int>(t.modes.size());
    if (t.initial_mode < 0 || t.initial_mode >= n) {
        throw CompileError("initial mode outside Q");
    }
    for (const auto& e : t.instantaneous_events) {
        if (t.stochastic_events.contains(e)) {
            throw CompileError("event '" + e + "' is both instantaneous and stochastic");
        }
    }
    for (const auto& f : t.flows) {
        if (f.mode < 0 || f.mode >= n) {
            throw CompileError("continuous transition outside Q");
        }
        if (f.stoichiometry.size() != t.variables.size()) {
            throw CompileError("stoichiometry length differs from |X|");
        }
    }
    check_endpoints(t, t.instantaneous, "instantaneous");
    check_endpoints(t, t.stochastic, "stochastic");
    for (const auto& tr : t.instantaneous) {
        if (!t.instantaneous_events.contains(tr.event)) {
            throw CompileError("instantaneous transition labelled by '" + tr.event + "' outside E_d");
        }
        if (!(tr.weight > 0.0)) {
            throw CompileError("non-positive weight on '" + tr.event + "'");
        }
    }
    for (const auto& tr : t.stochastic) {
        if (!t.stochastic_events.contains(tr.event)) {
            throw CompileError("stochastic transition labelled by '" + tr.event + "' outside E_s");
        }
    }
    if (auto event = rate_inconsistency(t)) {
        throw CompileError("inconsistent rates for stochastic event '" + *event + "'");
    }
}

std::optional<std::string> rate_inconsistency(const Tdsha& t) {
    std::map<std::string, const Expr*> seen;
    for (const auto& tr : t.stochastic) {
        auto [it, fresh] = seen.emplace(tr.event, &tr.rate);
        if (!fresh && !(*it->second == tr.rate)) {
            return tr.event;
        }
    }
    return std::nullopt;
}

std::optional<Reset> conjoin_resets(const Reset& first, const Reset& second) {
    Reset out = first;
    for (const auto& assignment : second) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const Assignment& a) { return a.variable == assignment.variable; });
        if (it == out.end()) {
            out.push_back(assignment);
        } else if (!(it->value == assignment.value)) {
            return std::nullopt;
        }
    }
    return out;
}

namespace {

std::optional<std::string> clash(const Reset& first, const Reset& second) {
    for (const auto& a : first) {
        for (const auto& b : second) {
            if (a.variable == b.variable && !(a.value == b.value)) {
                return a.variable;
            }
        }
    }
    return std::nullopt;
}

template <typename Transition>
std::optional<CompatibilityWitness> find_clash(const std::vector<Transition>& first,
                                               const std::vector<Transition>& second, bool stochastic) {
    for (std::size_t i = 0; i < first.size(); ++i) {
        for (std::size_t j = 0; j < second.size(); ++j) {
            if (first[i].event != second[j].event) {
                continue;
            }
            if (auto variable = clash(first[i].reset, second[j].reset)) {
                return CompatibilityWitness{stochastic, first[i].event, i, j, *variable};
            }
        }
    }
    return std::nullopt;
}

std::vector<double> lift(const std::vector<double>& s, const std::vector<int>& index, std::size_t size) {
    std::vector<double> out(size, 0.0);
    for (std::size_t j = 0; j < s.size(); ++j) {
        out[index[j]] = s[j];
    }
    return out;
}

} // namespace

Compatibility reset_compatible(const Tdsha& first, const Tdsha& second) {
    if (auto w = find_clash(first.instantaneous, second.instantaneous, false)) {
        return {false, w};
    }
    if (auto w = find_clash(first.stochastic, second.stochastic, true)) {
        return {false, w};
    }
    return {true, std::nullopt};
}

bool init_compatible(const Tdsha& first, const Tdsha& second) {
    return !clash(first.initial_point, second.initial_point).has_value();
}

Tdsha product(const Tdsha& t1, const Tdsha& t2, const std::set<std::string>& sync) {
    const auto e1 = t1.events();
    const auto e2 = t2.events();
    for (const auto& e : sync) {
        if (!e1.contains(e) || !e2.contains(e)) {
            throw ArgumentError("synchronization event '" + e + "' is not an event of both factors");
        }
    }
    if (auto c = reset_compatible(t1, t2); !c) {
        const auto& w = *c.witness;
        throw CompileError("factors are not reset-compatible: event '" + w.event + "' assigns '" + w.variable +
                           "' two different values");
    }
    if (!init_compatible(t1, t2)) {
        throw CompileError("factors are not init-compatible: the initial points disagree");
    }

    Tdsha t;
    const int n1 = static_cast<int>(t1.modes.size());
    const int n2 = static_cast<int>(t2.modes.size());
    auto at = [n2](int q1, int q2) { return q1 * n2 + q2; };

    t.modes.reserve(static_cast<std::size_t>(n1) * n2);
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            t.modes.push_back(ModeLabel::pair(t1.modes[i], t2.modes[j]));
        }
    }

    t.variables = t1.variables;
    std::vector<int> index1(t1.variables.size());
    std::vector<int> index2(t2.variables.size());
    for (std::size_t k = 0; k < t1.variables.size(); ++k) {
        index1[k] = static_cast<int>(k);
    }
    for (std::size_t k = 0; k < t2.variables.size(); ++k) {
        auto it = std::find(t.variables.begin(), t.variables.end(), t2.variables[k]);
        if (it == t.variables.end()) {
            t.variables.push_back(t2.variables[k]);
            it = t.variables.end() - 1;
        }
        index2[k] = static_cast<int>(it - t.variables.begin());
    }
    const std::size_t nx = t.variables.size();

    t.instantaneous_events = t1.instantaneous_events;
    t.instantaneous_events.insert(t2.instantaneous_events.begin(), t2.instantaneous_events.end());
    t.stochastic_events = t1.stochastic_events;
    t.stochastic_events.insert(t2.stochastic_events.begin(), t2.stochastic_events.end());

    t.parameters = t1.parameters;
    for (const auto& [name, value] : t2.parameters) {
        auto [it, fresh] = t.parameters.emplace(name, value);
        if (!fresh && it->second != value) {
            throw CompileError("factors disagree on parameter '" + name + "'");
        }
    }

    t.initial_mode = at(t1.initial_mode, t2.initial_mode);
    t.initial_point = *conjoin_resets(t1.initial_point, t2.initial_point);

    // Flows grouped by product mode: first factor's, then second's.
    std::vector<std::vector<const Flow*>> flows1(n1), flows2(n2);
    for (const auto& f : t1.flows) {
        flows1[f.mode].push_back(&f);
    }
    for (const auto& f : t2.flows) {
        flows2[f.mode].push_back(&f);
    }
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            for (const Flow* f : flows1[i]) {
                t.flows.push_back({at(i, j), lift(f->stoichiometry, index1, nx), f->rate});
            }
            for (const Flow* f : flows2[j]) {
                t.flows.push_back({at(i, j), lift(f->stoichiometry, index2, nx), f->rate});
            }
        }
    }

    // Interleaved transitions, then synchronized pairs.
    for (const auto& tr : t1.instantaneous) {
        if (sync.contains(tr.event)) continue;
        for (int j = 0; j < n2; ++j) {
            t.instantaneous.push_back({at(tr.source, j), at(tr.target, j), tr.guard, tr.reset, tr.weight, tr.event});
        }
    }
    for (const auto& tr : t2.instantaneous) {
        if (sync.contains(tr.event)) continue;
        for (int i = 0; i < n1; ++i) {
            t.instantaneous.push_back({at(i, tr.source), at(i, tr.target), tr.guard, tr.reset, tr.weight, tr.event});
        }
    }
    for (const auto& a : t1.instantaneous) {
        if (!sync.contains(a.event)) continue;
        for (const auto& b : t2.instantaneous) {
            if (a.event != b.event) continue;
            t.instantaneous.push_back({at(a.source, b.source), at(a.target, b.target), conjoin(a.guard, b.guard),
                                       *conjoin_resets(a.reset, b.reset), std::min(a.weight, b.weight), a.event});
        }
    }

    for (const auto& tr : t1.stochastic) {
        if (sync.contains(tr.event)) continue;
        for (int j = 0; j < n2; ++j) {
            t.stochastic.push_back({at(tr.source, j), at(tr.target, j), tr.guard, tr.reset, tr.rate, tr.event});
        }
    }
    for (const auto& tr : t2.stochastic) {
        if (sync.contains(tr.event)) continue;
        for (int i = 0; i < n1; ++i) {
            t.stochastic.push_back({at(i, tr.source), at(i, tr.target), tr.guard, tr.reset, tr.rate, tr.event});
        }
    }
    for (const auto& a : t1.stochastic) {
        if (!sync.contains(a.event)) continue;
        for (const auto& b : t2.stochastic) {
            if (a.event != b.event) continue;
            if (!(a.rate == b.rate)) {
                throw CompileError("inconsistent rates for stochastic event '" + a.event + "'");
            }
            t.stochastic.push_back({at(a.source, b.source), at(a.target, b.target), conjoin(a.guard, b.guard),
                                    *conjoin_resets(a.reset, b.reset), a.rate, a.event});
        }
    }

    if (auto event = rate_inconsistency(t)) {
        throw CompileError("inconsistent rates for stochastic event '" + *event + "'");
    }
    return t;
}

CompiledField assemble_field(const Tdsha& t, int mode) {
    if (mode < 0 || mode >= static_cast<int>(t.modes.size())) {
        throw ArgumentError("mode index out of range");
    }
    CompiledField field;
    field.mode = mode;
    std::vector<std::optional<Expr>> sums(t.variables.size());
    for (const auto& f : t.flows) {
        if (f.mode != mode) {
            continue;
        }
        for (std::size_t j = 0; j < f.stoichiometry.size(); ++j) {
            const double s = f.stoichiometry[j];
            if (s == 0.0) {
                continue;
            }
            Expr term = s == 1.0 ? f.rate : Expr::number(s) * f.rate;
            sums[j] = sums[j] ? *sums[j] + term : term;
        }
    }
    field.rhs.reserve(sums.size());
    for (auto& sum : sums) {
        field.rhs.push_back(sum ? *sum : Expr::number(0.0));
    }
    return field;
}

Tdsha prune_unreachable(const Tdsha& t) {
    const int n = static_cast<int>(t.modes.size());
    std::vector<std::vector<int>> next(n);
    for (const auto& tr : t.instantaneous) {
        next[tr.source].push_back(tr.target);
    }
    for (const auto& tr : t.stochastic) {
        next[tr.source].push_back(tr.target);
    }
    std::vector<bool> reached(n, false);
    std::deque<int> frontier{t.initial_mode};
    reached[t.initial_mode] = true;
    while (!frontier.empty()) {
        const int q = frontier.front();
        frontier.pop_front();
        for (int r : next[q]) {
            if (!reached[r]) {
                reached[r] = true;
                frontier.push_back(r);
            }
        }
    }

    std::vector<int> renumber(n, -1);
    Tdsha out;
    for (int q = 0; q < n; ++q) {
        if (reached[q]) {
            renumber[q] = static_cast<int>(out.modes.size());
            out.modes.push_back(t.modes[q]);
        }
    }
    out.variables = t.variables;
    out.instantaneous_events = t.instantaneous_events;
    out.stochastic_events = t.stochastic_events;
    out.parameters = t.parameters;
    out.initial_mode = renumber[t.initial_mode];
    out.initial_point = t.initial_point;
    for (const auto& f : t.flows) {
        if (reached[f.mode]) {
            out.flows.push_back({renumber[f.mode], f.stoichiometry, f.rate});
        }
    }
    for (const auto& tr : t.instantaneous) {
        if (reached[tr.source]) {
            auto copy = tr;
            copy.source = renumber[tr.source];
            copy.target = renumber[tr.target];
            out.instantaneous.push_back(std::move(copy));
        }
    }
    for (const auto& tr : t.stochastic) {
        if (reached[tr.source]) {
            auto copy = tr;
            copy.source = renumber[tr.source];
            copy.target = renumber[tr.target];
            out.stochastic.push_back(std::move(copy));
        }
    }
    return out;
}

} // namespace hype
