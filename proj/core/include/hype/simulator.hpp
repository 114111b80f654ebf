#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hype/bound_expr.hpp"
#include "hype/dopri5.hpp"
#include "hype/rng.hpp"
#include "hype/tdsha.hpp"

namespace hype {

struct SimConfig {
    std::uint64_t seed = 1;
    double t_end = 100.0;
    OdeOptions ode;
    /// Width in time of the bracket a guard crossing is refined to.
    double guard_tolerance = 1e-9;
    /// Most instantaneous firings allowed at a single time instant.
    int max_chain = 1000;
    /// Record every stride-th accepted step; jumps and t_end are always kept.
    int stride = 1;

    /// Throws ArgumentError if a field is out of range.
    void validate() const;
};

enum class JumpKind : std::uint8_t { Instantaneous, Stochastic };
enum class Termination : std::uint8_t { Horizon, ChainLimitExceeded, NumericFailure };

[[nodiscard]] std::string to_string(JumpKind kind);
[[nodiscard]] std::string to_string(Termination termination);

struct Sample {
    double t = 0.0;
    int mode = 0;
    std::vector<double> x;
    /// Name of the event that produced this state; empty on flow samples.
    std::string event;
};

struct JumpRecord {
    double t = 0.0;
    JumpKind kind = JumpKind::Instantaneous;
    std::string event;
    int source = 0;
    int target = 0;
    std::vector<double> before;
    std::vector<double> after;
};

struct Trace {
    std::vector<std::string> variables;
    std::vector<std::string> mode_labels;
    std::vector<Sample> samples;
    std::vector<JumpRecord> jumps;
    Termination termination = Termination::Horizon;
    std::string message;
    std::uint64_t seed = 0;
    double t_end = 0.0;
};

/// A Tdsha with every expression resolved against its variables and
/// parameters. Immutable, so one instance can serve concurrent runs.
class BoundAutomaton {
  public:
    struct Instantaneous {
        int source = 0;
        int target = 0;
        BoundExpr guard;
        std::vector<std::pair<int, BoundExpr>> reset;
        double weight = 1.0;
        std::string event;
    };
    struct Stochastic {
        int source = 0;
        int target = 0;
        BoundExpr guard;
        std::vector<std::pair<int, BoundExpr>> reset;
        std::string event;
    };
    /// Stochastic transitions of one mode sharing an event label.
    struct EventGroup {
        int clock = 0;  // index into stochastic_events()
        BoundExpr rate;
        std::vector<int> transitions;
    };
    struct Mode {
        std::vector<BoundExpr> rhs;
        std::vector<int> instantaneous;
        std::vector<EventGroup> stochastic;
    };

    /// Throws EvalError if an expression names something undeclared.
    explicit BoundAutomaton(const Tdsha& automaton);

    [[nodiscard]] const Tdsha& source() const noexcept { return *automaton_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return automaton_->variables.size(); }
    [[nodiscard]] const Mode& mode(int q) const { return modes_[q]; }
    [[nodiscard]] const std::vector<Instantaneous>& instantaneous() const noexcept { return instantaneous_; }
    [[nodiscard]] const std::vector<Stochastic>& stochastic() const noexcept { return stochastic_; }
    [[nodiscard]] const std::vector<std::string>& stochastic_events() const noexcept { return clocks_; }

  private:
    std::shared_ptr<const Tdsha> automaton_;
    std::vector<Mode> modes_;
    std::vector<Instantaneous> instantaneous_;
    std::vector<Stochastic> stochastic_;
    std::vector<std::string> clocks_;
};

struct FireResult {
    int transition = -1;
    int target = 0;
    std::vector<double> after;
};

/// Picks one candidate (by weight for instantaneous transitions, uniformly
/// for same-event stochastic ones) and applies its reset simultaneously.
/// Draws from `rng` only when there is more than one candidate.
[[nodiscard]] FireResult fire(const BoundAutomaton& automaton, JumpKind kind, std::span<const int> candidates,
                              std::span<const double> x, Rng& rng);

[[nodiscard]] Trace simulate(const BoundAutomaton& automaton, const SimConfig& config);
[[nodiscard]] Trace simulate(const Tdsha& automaton, const SimConfig& config);

} // namespace hype
