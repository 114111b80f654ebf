#include "hype/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>

#include "hype/error.hpp"

namespace hype {

void Moments::add(double value) {
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
}

void Moments::merge(const Moments& other) {
    if (other.count == 0) {
        return;
    }
    if (count == 0) {
        *this = other;
        return;
    }
    const double n1 = static_cast<double>(count);
    const double n2 = static_cast<double>(other.count);
    const double delta = other.mean - mean;
    const double n = n1 + n2;
    mean += delta * n2 / n;
    m2 += other.m2 + delta * delta * n1 * n2 / n;
    count += other.count;
}

double Moments::variance() const { return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1); }

namespace {

bool enabled(const BoundAutomaton& a, int mode, int clock, std::span<const double> x) {
    for (const auto& group : a.mode(mode).stochastic) {
        if (group.clock != clock) {
            continue;
        }
        for (int i : group.transitions) {
            const auto& guard = a.stochastic()[i].guard;
            if (guard.always_true() || guard.truth(x)) {
                return true;
            }
        }
    }
    return false;
}

} // namespace

RunStatistics run_statistics(const Trace& trace, const BoundAutomaton& automaton) {
    RunStatistics stats;
    const Tdsha& t = automaton.source();
    std::vector<std::pair<std::string, JumpKind>> names;
    for (const auto& e : t.instantaneous_events) {
        names.emplace_back(e, JumpKind::Instantaneous);
    }
    for (const auto& e : t.stochastic_events) {
        names.emplace_back(e, JumpKind::Stochastic);
    }
    std::sort(names.begin(), names.end());
    for (const auto& [name, kind] : names) {
        stats.events.push_back({name, kind, {}, {}, {}});
    }
    stats.occupancy.assign(t.modes.size(), 0.0);
    if (trace.samples.empty()) {
        return stats;
    }
    for (std::size_t i = 0; i + 1 < trace.samples.size(); ++i) {
        stats.occupancy[trace.samples[i].mode] += trace.samples[i + 1].t - trace.samples[i].t;
    }

    auto find = [&](const std::string& event) -> EventObservations& {
        return *std::find_if(stats.events.begin(), stats.events.end(),
                             [&](const EventObservations& o) { return o.event == event; });
    };
    const auto& clocks = automaton.stochastic_events();
    std::vector<std::optional<double>> since(clocks.size());
    auto refresh = [&](int mode, std::span<const double> x, double now, int fired) {
        for (std::size_t c = 0; c < clocks.size(); ++c) {
            if (!enabled(automaton, mode, static_cast<int>(c), x)) {
                since[c].reset();
            } else if (!since[c] || static_cast<int>(c) == fired) {
                since[c] = now;
            }
        }
    };
    refresh(trace.samples.front().mode, trace.samples.front().x, trace.samples.front().t, -1);

    for (const auto& jump : trace.jumps) {
        auto& obs = find(jump.event);
        if (!obs.firing_times.empty()) {
            obs.gaps.push_back(jump.t - obs.firing_times.back());
        }
        obs.firing_times.push_back(jump.t);
        int fired = -1;
        if (jump.kind == JumpKind::Stochastic) {
            fired = static_cast<int>(std::find(clocks.begin(), clocks.end(), jump.event) - clocks.begin());
            if (since[fired]) {
                obs.waiting.push_back(jump.t - *since[fired]);
            }
        }
        refresh(jump.target, jump.after, jump.t, fired);
    }
    return stats;
}

EnsembleSummary run_ensemble(const Tdsha& automaton, const EnsembleConfig& config) {
    if (config.runs < 1) {
        throw ArgumentError("an ensemble needs at least one run");
    }
    config.sim.validate();
    const BoundAutomaton bound(automaton);

    const auto runs = static_cast<std::size_t>(config.runs);
    std::vector<Trace> traces(runs);
    std::vector<RunStatistics> stats(runs);
    std::vector<RunOutcome> outcomes(runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < runs; i = next++) {
            SimConfig sim = config.sim;
            sim.seed = split_seed(config.sim.seed, i);
            traces[i] = simulate(bound, sim);
            stats[i] = run_statistics(traces[i], bound);
            const Trace& tr = traces[i];
            outcomes[i] = {static_cast<int>(i), tr.seed, tr.termination, tr.message, tr.jumps.size(),
                           tr.samples.empty() ? 0.0 : tr.samples.back().t};
            if (!config.keep_traces) {
                traces[i] = Trace{};
            }
        }
    };
    unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }

    EnsembleSummary summary;
    summary.seed = config.sim.seed;
    summary.runs = config.runs;
    summary.t_end = config.sim.t_end;
    for (const auto& label : automaton.modes) {
        summary.mode_labels.push_back(label.to_string());
    }
    summary.occupancy.assign(automaton.modes.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < runs; ++i) {
        const RunStatistics& s = stats[i];
        if (summary.events.empty()) {
            for (const auto& e : s.events) {
                summary.events.push_back({e.event, e.kind, 0, {}, {}});
            }
        }
        for (std::size_t k = 0; k < s.events.size(); ++k) {
            auto& e = summary.events[k];
            e.firings += s.events[k].firing_times.size();
            Moments gap, waiting;
            for (double v : s.events[k].gaps) gap.add(v);
            for (double v : s.events[k].waiting) waiting.add(v);
            e.gap.merge(gap);
            e.waiting.merge(waiting);
        }
        for (std::size_t q = 0; q < s.occupancy.size(); ++q) {
            summary.occupancy[q] += s.occupancy[q];
            total += s.occupancy[q];
        }
        summary.partial = summary.partial || outcomes[i].termination != Termination::Horizon;
    }
    summary.outcomes = std::move(outcomes);
    if (total > 0.0) {
        for (double& v : summary.occupancy) v /= total;
    }
    if (config.keep_traces) {
        summary.traces = std::move(traces);
        summary.statistics = std::move(stats);
    }
    return summary;
}

} // namespace hype
