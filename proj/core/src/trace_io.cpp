#include "hype/trace_io.hpp"

#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace hype {

std::string format_exact(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

namespace {

// Event names are identifiers, but quote defensively for spreadsheet tools.
std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// JSON numbers lose nothing when written from the %.17g form.
nlohmann::ordered_json exact(double value) {
    if (!std::isfinite(value)) {
        return format_exact(value);
    }
    return nlohmann::ordered_json::parse(format_exact(value));
}

} // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << "time,mode_id";
    for (const auto& v : trace.variables) {
        out << ',' << csv_field(v);
    }
    out << ",event\n";
    for (const auto& s : trace.samples) {
        out << format_exact(s.t) << ',' << s.mode;
        for (double v : s.x) {
            out << ',' << format_exact(v);
        }
        out << ',' << csv_field(s.event) << '\n';
    }
}

void write_events_csv(std::ostream& out, const Trace& trace) {
    out << "time,event,kind,src_mode,dst_mode\n";
    for (const auto& j : trace.jumps) {
        out << format_exact(j.t) << ',' << csv_field(j.event) << ',' << to_string(j.kind) << ',' << j.source << ','
            << j.target << '\n';
    }
}

std::string trace_meta_json(const Trace& trace) {
    nlohmann::ordered_json doc;
    doc["termination"] = to_string(trace.termination);
    doc["message"] = trace.message;
    doc["seed"] = trace.seed;
    doc["t_end"] = exact(trace.t_end);
    doc["end_time"] = exact(trace.samples.empty() ? 0.0 : trace.samples.back().t);
    doc["variables"] = trace.variables;
    doc["modes"] = trace.mode_labels;
    std::size_t instantaneous = 0;
    nlohmann::ordered_json per_event = nlohmann::ordered_json::object();
    for (const auto& j : trace.jumps) {
        instantaneous += j.kind == JumpKind::Instantaneous;
        auto& slot = per_event[j.event];
        slot = slot.is_null() ? 1 : slot.get<std::size_t>() + 1;
    }
    doc["jumps"] = {{"total", trace.jumps.size()},
                    {"instantaneous", instantaneous},
                    {"stochastic", trace.jumps.size() - instantaneous},
                    {"by_event", per_event}};
    doc["samples"] = trace.samples.size();
    return doc.dump(2) + "\n";
}

std::string ensemble_summary_json(const EnsembleSummary& summary) {
    nlohmann::ordered_json doc;
    doc["seed"] = summary.seed;
    doc["seed_rule"] = "splitmix64";
    doc["runs"] = summary.runs;
    doc["t_end"] = exact(summary.t_end);
    doc["partial"] = summary.partial;
    auto moments = [](const Moments& m) {
        return nlohmann::ordered_json{{"count", m.count}, {"mean", exact(m.mean)}, {"variance", exact(m.variance())}};
    };
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const auto& e : summary.events) {
        nlohmann::ordered_json item;
        item["event"] = e.event;
        item["kind"] = to_string(e.kind);
        item["firings"] = e.firings;
        item["inter_firing"] = moments(e.gap);
        if (e.kind == JumpKind::Stochastic) {
            item["waiting"] = moments(e.waiting);
        }
        events.push_back(std::move(item));
    }
    doc["events"] = std::move(events);
    nlohmann::ordered_json occupancy = nlohmann::ordered_json::array();
    for (std::size_t q = 0; q < summary.occupancy.size(); ++q) {
        occupancy.push_back({{"mode", q}, {"label", summary.mode_labels[q]}, {"fraction", exact(summary.occupancy[q])}});
    }
    doc["occupancy"] = std::move(occupancy);
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& o : summary.outcomes) {
        runs.push_back({{"run", o.run},
                        {"seed", o.seed},
                        {"termination", to_string(o.termination)},
                        {"message", o.message},
                        {"jumps", o.jumps},
                        {"end_time", exact(o.end_time)}});
    }
    doc["outcomes"] = std::move(runs);
    return doc.dump(2) + "\n";
}

} // namespace hype
