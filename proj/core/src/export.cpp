#include "hype/export.hpp"

#include <json.hpp>

namespace hype {

namespace {

using nlohmann::ordered_json;

ordered_json reset_json(const Reset& reset) {
    ordered_json out = ordered_json::array();
    for (const auto& a : reset) {
        out.push_back({{"variable", a.variable}, {"value", to_string(a.value)}});
    }
    return out;
}

std::string reset_text(const Reset& reset) {
    if (reset.empty()) {
        return "true";
    }
    std::string out;
    for (std::size_t i = 0; i < reset.size(); ++i) {
        out += (i ? " and " : "") + reset[i].variable + "' = " + to_string(reset[i].value);
    }
    return out;
}

std::string dot_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out;
}

} // namespace

std::string automaton_json(const Tdsha& t) {
    ordered_json doc;
    doc["format"] = "hype-tdsha";
    doc["version"] = 1;
    doc["variables"] = t.variables;
    ordered_json parameters = ordered_json::object();
    for (const auto& [name, value] : t.parameters) {
        parameters[name] = value;
    }
    doc["parameters"] = parameters;
    doc["events"] = {{"instantaneous", t.instantaneous_events}, {"stochastic", t.stochastic_events}};

    ordered_json modes = ordered_json::array();
    for (std::size_t i = 0; i < t.modes.size(); ++i) {
        modes.push_back({{"id", i}, {"label", t.modes[i].to_string()}});
    }
    doc["modes"] = modes;
    doc["init"] = {{"mode", t.initial_mode}, {"point", reset_json(t.initial_point)}};

    ordered_json flows = ordered_json::array();
    for (const auto& f : t.flows) {
        flows.push_back({{"mode", f.mode}, {"stoichiometry", f.stoichiometry}, {"rate", to_string(f.rate)}});
    }
    doc["continuous"] = flows;

    ordered_json instantaneous = ordered_json::array();
    for (const auto& tr : t.instantaneous) {
        instantaneous.push_back({{"source", tr.source},
                                 {"target", tr.target},
                                 {"event", tr.event},
                                 {"guard", to_string(tr.guard)},
                                 {"reset", reset_json(tr.reset)},
                                 {"weight", tr.weight}});
    }
    doc["instantaneous"] = instantaneous;

    ordered_json stochastic = ordered_json::array();
    for (const auto& tr : t.stochastic) {
        stochastic.push_back({{"source", tr.source},
                              {"target", tr.target},
                              {"event", tr.event},
                              {"guard", to_string(tr.guard)},
                              {"reset", reset_json(tr.reset)},
                              {"rate", to_string(tr.rate)}});
    }
    doc["stochastic"] = stochastic;
    return doc.dump(2) + "\n";
}

std::string automaton_dot(const Tdsha& t) {
    std::string out = "digraph tdsha {\n  rankdir=LR;\n  node [shape=box, style=rounded];\n";
    out += "  start [shape=point];\n  start -> m" + std::to_string(t.initial_mode) + ";\n";
    for (std::size_t q = 0; q < t.modes.size(); ++q) {
        std::string label = t.modes[q].to_string();
        for (const auto& f : t.flows) {
            if (f.mode != static_cast<int>(q)) {
                continue;
            }
            for (std::size_t j = 0; j < f.stoichiometry.size(); ++j) {
                if (f.stoichiometry[j] == 0.0) {
                    continue;
                }
                label += "\n" + t.variables[j] + "' += ";
                if (f.stoichiometry[j] != 1.0) {
                    label += format_number(f.stoichiometry[j]) + " * ";
                }
                label += to_string(f.rate);
            }
        }
        out += "  m" + std::to_string(q) + " [label=\"" + dot_escape(label) + "\"];\n";
    }
    for (const auto& tr : t.instantaneous) {
        std::string label = tr.event;
        if (!tr.guard.is_true()) {
            label += " [" + to_string(tr.guard) + "]";
        }
        if (!tr.reset.empty()) {
            label += " / " + reset_text(tr.reset);
        }
        if (tr.weight != 1.0) {
            label += " w=" + format_number(tr.weight);
        }
        out += "  m" + std::to_string(tr.source) + " -> m" + std::to_string(tr.target) + " [label=\"" +
               dot_escape(label) + "\", style=solid];\n";
    }
    for (const auto& tr : t.stochastic) {
        std::string label = tr.event + " @ " + to_string(tr.rate);
        if (!tr.guard.is_true()) {
            label += " [" + to_string(tr.guard) + "]";
        }
        if (!tr.reset.empty()) {
            label += " / " + reset_text(tr.reset);
        }
        out += "  m" + std::to_string(tr.source) + " -> m" + std::to_string(tr.target) + " [label=\"" +
               dot_escape(label) + "\", style=dashed];\n";
    }
    out += "}\n";
    return out;
}

std::string report_json(const CompileReport& report) {
    ordered_json doc;
    ordered_json stages = ordered_json::array();
    for (const auto& s : report.stages) {
        stages.push_back({{"stage", s.stage},
                          {"modes_before", s.modes_before},
                          {"modes_after", s.modes_after},
                          {"transitions", s.transitions},
                          {"seconds", s.seconds}});
    }
    doc["stages"] = stages;
    doc["modes_before_prune"] = report.modes_before_prune;
    doc["modes_after_prune"] = report.modes_after_prune;
    doc["warnings"] = report.warnings;
    return doc.dump(2) + "\n";
}

} // namespace hype
