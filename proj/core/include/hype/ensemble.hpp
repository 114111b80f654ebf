#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hype/simulator.hpp"

namespace hype {

/// Running mean and variance (Welford), mergeable in a fixed order.
struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double value);
    void merge(const Moments& other);
    /// Unbiased sample variance; 0 with fewer than two values.
    [[nodiscard]] double variance() const;
};

/// Observations of one event in one trace.
struct EventObservations {
    std::string event;
    JumpKind kind = JumpKind::Instantaneous;
    std::vector<double> firing_times;
    /// Time between consecutive firings.
    std::vector<double> gaps;
    /// Stochastic events only: time from becoming enabled to firing.
    std::vector<double> waiting;
};

struct RunStatistics {
    std::vector<EventObservations> events;  // every event of the automaton, sorted by name
    std::vector<double> occupancy;          // time spent per mode id
};

/// Per-event and per-mode statistics of one trace.
[[nodiscard]] RunStatistics run_statistics(const Trace& trace, const BoundAutomaton& automaton);

struct EnsembleConfig {
    SimConfig sim;
    int runs = 100;
    /// Worker threads; 0 picks the hardware concurrency.
    int threads = 0;
    bool keep_traces = false;
};

struct EventSummary {
    std::string event;
    JumpKind kind = JumpKind::Instantaneous;
    std::size_t firings = 0;
    Moments gap;
    Moments waiting;
};

struct RunOutcome {
    int run = 0;
    std::uint64_t seed = 0;
    Termination termination = Termination::Horizon;
    std::string message;
    std::size_t jumps = 0;
    double end_time = 0.0;
};

struct EnsembleSummary {
    std::uint64_t seed = 0;
    int runs = 0;
    double t_end = 0.0;
    std::vector<std::string> mode_labels;
    std::vector<EventSummary> events;
    /// Fraction of total simulated time spent in each mode.
    std::vector<double> occupancy;
    std::vector<RunOutcome> outcomes;
    /// True if any run stopped before the horizon.
    bool partial = false;
    /// Filled only with keep_traces.
    std::vector<Trace> traces;
    std::vector<RunStatistics> statistics;
};

/// Run i uses seed split_seed(config.sim.seed, i). Results are merged in
/// run order, so the summary does not depend on the thread count.
[[nodiscard]] EnsembleSummary run_ensemble(const Tdsha& automaton, const EnsembleConfig& config);

} // namespace hype
