// hype: check, compile, simulate and run ensembles of stochastic HYPE models.
//
// Exit status: 0 success, 1 invalid model or compile error, 2 simulation
// failure, 3 usage error.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hype/compiler.hpp"
#include "hype/ensemble.hpp"
#include "hype/error.hpp"
#include "hype/export.hpp"
#include "hype/parser.hpp"
#include "hype/simulator.hpp"
#include "hype/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kModel = 1, kSimulation = 2, kUsage = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string input;
    std::vector<std::string> sets;
    std::string output_dir;
    std::string prune = "final";
};

struct SimFlags {
    std::uint64_t seed = 1;
    double t_end = 100.0;
    double rtol = 1e-8;
    double atol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    double guard_tolerance = 1e-9;
    int max_chain = 1000;
    int stride = 1;
};

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += sep;
        out += item;
    }
    return out;
}

// Parses and validates; diagnostics go to stderr. nullopt means exit 1.
std::optional<hype::HypeModel> load(const std::string& path) {
    auto result = hype::parse_model_file(path);
    for (const auto& error : result.errors) {
        std::cerr << error.to_string() << '\n';
    }
    if (!result.ok()) {
        return std::nullopt;
    }
    return std::move(*result.model);
}

void apply_sets(hype::HypeModel& model, const std::vector<std::string>& sets) {
    for (const auto& item : sets) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw UsageError("--set expects name=value, got '" + item + "'");
        }
        const std::string name = item.substr(0, eq);
        const std::string text = item.substr(eq + 1);
        double value = 0.0;
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
            throw UsageError("--set " + name + ": '" + text + "' is not a number");
        }
        try {
            model.set_parameter(name, value);
        } catch (const hype::ArgumentError& e) {
            throw UsageError(e.what());
        }
    }
}

fs::path output_dir(const Common& c) {
    fs::path dir = c.output_dir;
    if (dir.empty()) {
        const char* env = std::getenv("HYPE_OUTPUT_DIR");
        dir = env && *env ? fs::path(env) : fs::path(".");
    }
    fs::create_directories(dir);
    return dir;
}

fs::path artifact(const Common& c, const std::string& suffix) {
    return output_dir(c) / (fs::path(c.input).stem().string() + suffix);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!(out << content)) {
        throw std::runtime_error("cannot write " + path.string());
    }
    std::cout << "wrote " << path.string() << '\n';
}

hype::SimConfig sim_config(const SimFlags& f) {
    hype::SimConfig config;
    config.seed = f.seed;
    config.t_end = f.t_end;
    config.ode.rtol = f.rtol;
    config.ode.atol = f.atol;
    config.ode.max_step = f.max_step;
    config.guard_tolerance = f.guard_tolerance;
    config.max_chain = f.max_chain;
    config.stride = f.stride;
    try {
        config.validate();
    } catch (const hype::ArgumentError& e) {
        throw UsageError(e.what());
    }
    return config;
}

hype::PruneMode prune_mode(const std::string& text) {
    try {
        return hype::parse_prune_mode(text);
    } catch (const hype::ArgumentError& e) {
        throw UsageError(e.what());
    }
}

// Loads, applies overrides and compiles. nullopt means exit 1.
std::optional<hype::Compilation> build(const Common& c) {
    const auto prune = prune_mode(c.prune);
    auto model = load(c.input);
    if (!model) {
        return std::nullopt;
    }
    apply_sets(*model, c.sets);
    try {
        return hype::compile(*model, {prune});
    } catch (const hype::Error& e) {
        std::cerr << c.input << ": " << e.what() << '\n';
        return std::nullopt;
    }
}

int cmd_check(const Common& c) {
    auto model = load(c.input);
    if (!model) {
        return kModel;
    }
    apply_sets(*model, c.sets);
    std::vector<std::string> subs, types;
    for (const auto& s : model->subcomponents) {
        subs.push_back(s.formals.empty() ? s.name : s.name + "(" + join(s.formals) + ")");
    }
    for (const auto& t : model->influence_types) {
        types.push_back(t.formals.empty() ? t.name : t.name + "(" + join(t.formals) + ")");
    }
    std::cout << "model " << model->name << ": ok\n";
    std::cout << "subcomponents (" << subs.size() << "): " << join(subs) << '\n';
    const auto ed = model->instantaneous_events();
    const auto es = model->stochastic_events();
    std::cout << "instantaneous events (" << ed.size() << "): " << join(ed) << '\n';
    std::cout << "stochastic events (" << es.size() << "): " << join(es) << '\n';
    std::cout << "variables (" << model->variables.size() << "): " << join(model->variable_names()) << '\n';
    std::cout << "influence types (" << types.size() << "): " << join(types) << '\n';
    return kOk;
}

int cmd_compile(const Common& c, const std::vector<std::string>& emit) {
    for (const auto& e : emit) {
        if (e != "automaton" && e != "graph" && e != "report") {
            throw UsageError("--emit: unknown artifact '" + e + "' (automaton, graph, report)");
        }
    }
    auto compiled = build(c);
    if (!compiled) {
        return kModel;
    }
    const auto& a = compiled->automaton;
    const auto& report = compiled->report;
    for (const auto& w : report.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    if (c.prune == "off") {
        std::cout << "modes: " << a.modes.size() << " (not pruned)\n";
    } else {
        std::cout << "modes: " << report.modes_before_prune << " → " << report.modes_after_prune
                  << " (pruned)\n";
    }
    std::cout << "transitions: " << a.flows.size() << " continuous, " << a.instantaneous.size()
              << " instantaneous, " << a.stochastic.size() << " stochastic\n";
    for (const auto& e : emit) {
        if (e == "automaton") {
            write_file(artifact(c, ".tdsha.json"), hype::automaton_json(a));
        } else if (e == "graph") {
            write_file(artifact(c, ".dot"), hype::automaton_dot(a));
        } else {
            write_file(artifact(c, ".report.json"), hype::report_json(report));
        }
    }
    return kOk;
}

int cmd_simulate(const Common& c, const SimFlags& flags) {
    const auto config = sim_config(flags);
    auto compiled = build(c);
    if (!compiled) {
        return kModel;
    }
    hype::Trace trace;
    try {
        trace = hype::simulate(compiled->automaton, config);
    } catch (const hype::Error& e) {
        std::cerr << c.input << ": " << e.what() << '\n';
        return kSimulation;
    }
    std::ostringstream samples, events;
    hype::write_trace_csv(samples, trace);
    hype::write_events_csv(events, trace);
    write_file(artifact(c, ".trace.csv"), samples.str());
    write_file(artifact(c, ".events.csv"), events.str());
    write_file(artifact(c, ".meta.json"), hype::trace_meta_json(trace));

    std::size_t stochastic = 0;
    for (const auto& j : trace.jumps) {
        stochastic += j.kind == hype::JumpKind::Stochastic;
    }
    std::cout << "termination: " << hype::to_string(trace.termination);
    if (!trace.message.empty()) {
        std::cout << " (" << trace.message << ")";
    }
    std::cout << "\njumps: " << trace.jumps.size() << " (" << trace.jumps.size() - stochastic << " instantaneous, "
              << stochastic << " stochastic)\n";
    return trace.termination == hype::Termination::Horizon ? kOk : kSimulation;
}

int cmd_ensemble(const Common& c, const SimFlags& flags, int runs, int threads) {
    if (runs < 1) {
        throw UsageError("--runs must be at least 1");
    }
    hype::EnsembleConfig config;
    config.sim = sim_config(flags);
    config.runs = runs;
    config.threads = threads;
    auto compiled = build(c);
    if (!compiled) {
        return kModel;
    }
    hype::EnsembleSummary summary;
    try {
        summary = hype::run_ensemble(compiled->automaton, config);
    } catch (const hype::Error& e) {
        std::cerr << c.input << ": " << e.what() << '\n';
        return kSimulation;
    }
    write_file(artifact(c, ".summary.json"), hype::ensemble_summary_json(summary));
    std::cout << "runs: " << summary.runs << (summary.partial ? " (partial)" : "") << '\n';
    for (const auto& e : summary.events) {
        std::cout << "  " << e.event << ": " << e.firings << " firings";
        if (e.gap.count > 0) {
            std::cout << ", mean gap " << hype::format_exact(e.gap.mean);
        }
        if (e.kind == hype::JumpKind::Stochastic && e.waiting.count > 0) {
            std::cout << ", mean waiting " << hype::format_exact(e.waiting.mean);
        }
        std::cout << '\n';
    }
    for (const auto& o : summary.outcomes) {
        if (o.termination != hype::Termination::Horizon) {
            std::cerr << "run " << o.run << ": " << hype::to_string(o.termination) << ": " << o.message << '\n';
        }
    }
    return summary.partial ? kSimulation : kOk;
}

void add_common(CLI::App* cmd, Common& c, bool with_sets = true) {
    cmd->add_option("model", c.input, "Model file (.hype)")->required();
    if (with_sets) {
        cmd->add_option("--set", c.sets, "Override a declared parameter, name=value")->take_all();
    }
}

void add_output(CLI::App* cmd, Common& c) {
    cmd->add_option("-o,--output-dir", c.output_dir, "Output directory (default: $HYPE_OUTPUT_DIR or .)");
    cmd->add_option("--prune", c.prune, "Pruning of unreachable modes: final, each-stage or off");
}

void add_sim(CLI::App* cmd, SimFlags& f) {
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--t-end", f.t_end, "Time horizon");
    cmd->add_option("--rtol", f.rtol, "Integrator relative tolerance");
    cmd->add_option("--atol", f.atol, "Integrator absolute tolerance");
    cmd->add_option("--max-step", f.max_step, "Largest integrator step");
    cmd->add_option("--guard-tol", f.guard_tolerance, "Time tolerance of guard crossings");
    cmd->add_option("--max-chain", f.max_chain, "Instantaneous firings allowed at one instant");
    cmd->add_option("--stride", f.stride, "Record every n-th integrator step");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compile and simulate stochastic HYPE models"};
    app.require_subcommand(1);

    Common common;
    SimFlags flags;
    std::vector<std::string> emit{"automaton"};
    int runs = 100;
    int threads = 0;

    auto* check = app.add_subcommand("check", "Validate a model and summarize it");
    add_common(check, common);

    auto* compile = app.add_subcommand("compile", "Compile a model to a TDSHA");
    add_common(compile, common);
    add_output(compile, common);
    compile->add_option("--emit", emit, "Artifacts to write: automaton, graph, report")->delimiter(',');

    auto* simulate = app.add_subcommand("simulate", "Simulate one trajectory");
    add_common(simulate, common);
    add_output(simulate, common);
    add_sim(simulate, flags);

    auto* ensemble = app.add_subcommand("ensemble", "Simulate independent runs and summarize them");
    add_common(ensemble, common);
    add_output(ensemble, common);
    add_sim(ensemble, flags);
    ensemble->add_option("--runs", runs, "Number of runs");
    ensemble->add_option("--threads", threads, "Worker threads (0: all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*check) return cmd_check(common);
        if (*compile) return cmd_compile(common, emit);
        if (*simulate) return cmd_simulate(common, flags);
        return cmd_ensemble(common, flags, runs, threads);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSimulation;
    }
}
