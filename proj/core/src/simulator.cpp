#include "hype/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "hype/error.hpp"

namespace hype {

void SimConfig::validate() const {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw ArgumentError("t_end must be a positive finite time");
    }
    if (!(ode.rtol > 0.0) || !(ode.atol > 0.0)) {
        throw ArgumentError("integrator tolerances must be positive");
    }
    if (!(ode.max_step > 0.0)) {
        throw ArgumentError("maximum step must be positive");
    }
    if (!(guard_tolerance > 0.0)) {
        throw ArgumentError("guard tolerance must be positive");
    }
    if (max_chain < 1) {
        throw ArgumentError("the instantaneous chain limit must be at least 1");
    }
    if (stride < 1) {
        throw ArgumentError("trace stride must be at least 1");
    }
}

std::string to_string(JumpKind kind) {
    return kind == JumpKind::Instantaneous ? "instantaneous" : "stochastic";
}

std::string to_string(Termination termination) {
    switch (termination) {
    case Termination::Horizon: return "horizon";
    case Termination::ChainLimitExceeded: return "chain-limit-exceeded";
    case Termination::NumericFailure: return "numeric-failure";
    }
    return "?";
}

namespace {

std::vector<std::pair<int, BoundExpr>> bind_reset(const Reset& reset, const Tdsha& t) {
    std::vector<std::pair<int, BoundExpr>> out;
    for (const auto& a : reset) {
        auto index = t.variable_index(a.variable);
        if (!index) {
            throw EvalError("reset of unknown variable '" + a.variable + "'");
        }
        out.emplace_back(*index, BoundExpr::bind(a.value, t.variables, t.parameters));
    }
    return out;
}

} // namespace

BoundAutomaton::BoundAutomaton(const Tdsha& t) : automaton_(std::make_shared<const Tdsha>(t)) {
    const Tdsha& a = *automaton_;
    clocks_.assign(a.stochastic_events.begin(), a.stochastic_events.end());
    modes_.resize(a.modes.size());
    for (std::size_t q = 0; q < a.modes.size(); ++q) {
        for (const auto& rhs : assemble_field(a, static_cast<int>(q)).rhs) {
            modes_[q].rhs.push_back(BoundExpr::bind(rhs, a.variables, a.parameters));
        }
    }
    for (std::size_t i = 0; i < a.instantaneous.size(); ++i) {
        const auto& tr = a.instantaneous[i];
        instantaneous_.push_back({tr.source, tr.target, BoundExpr::bind(tr.guard, a.variables, a.parameters),
                                  bind_reset(tr.reset, a), tr.weight, tr.event});
        modes_[tr.source].instantaneous.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < a.stochastic.size(); ++i) {
        const auto& tr = a.stochastic[i];
        stochastic_.push_back({tr.source, tr.target, BoundExpr::bind(tr.guard, a.variables, a.parameters),
                               bind_reset(tr.reset, a), tr.event});
        auto& groups = modes_[tr.source].stochastic;
        const int clock = static_cast<int>(std::find(clocks_.begin(), clocks_.end(), tr.event) - clocks_.begin());
        auto group = std::find_if(groups.begin(), groups.end(), [&](const EventGroup& g) { return g.clock == clock; });
        if (group == groups.end()) {
            groups.push_back({clock, BoundExpr::bind(tr.rate, a.variables, a.parameters), {}});
            group = groups.end() - 1;
        }
        group->transitions.push_back(static_cast<int>(i));
    }
}

namespace {

std::vector<double> apply_reset(const std::vector<std::pair<int, BoundExpr>>& reset, std::span<const double> x) {
    std::vector<double> after(x.begin(), x.end());
    // Every right-hand side sees the pre-jump valuation.
    std::vector<double> values;
    values.reserve(reset.size());
    for (const auto& [index, value] : reset) {
        values.push_back(value.real(x));
    }
    for (std::size_t i = 0; i < reset.size(); ++i) {
        after[reset[i].first] = values[i];
    }
    return after;
}

} // namespace

FireResult fire(const BoundAutomaton& automaton, JumpKind kind, std::span<const int> candidates,
                std::span<const double> x, Rng& rng) {
    if (candidates.empty()) {
        throw ArgumentError("no transition to fire");
    }
    std::size_t pick = 0;
    if (candidates.size() > 1) {
        if (kind == JumpKind::Instantaneous) {
            double total = 0.0;
            for (int c : candidates) {
                total += automaton.instantaneous()[c].weight;
            }
            const double u = rng.uniform() * total;
            double cumulative = 0.0;
            pick = candidates.size() - 1;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                cumulative += automaton.instantaneous()[candidates[i]].weight;
                if (u < cumulative) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = std::min(candidates.size() - 1,
                            static_cast<std::size_t>(rng.uniform() * static_cast<double>(candidates.size())));
        }
    }
    FireResult result;
    result.transition = candidates[pick];
    if (kind == JumpKind::Instantaneous) {
        const auto& tr = automaton.instantaneous()[result.transition];
        result.target = tr.target;
        result.after = apply_reset(tr.reset, x);
    } else {
        const auto& tr = automaton.stochastic()[result.transition];
        result.target = tr.target;
        result.after = apply_reset(tr.reset, x);
    }
    return result;
}

namespace {

constexpr int kScanPoints = 8;

struct NegativeRate {
    std::string event;
    double rate;
};

struct Stop {
    Termination termination;
    std::string message;
};

class Run {
  public:
    Run(const BoundAutomaton& automaton, const SimConfig& config)
        : a_(automaton), config_(config), rng_(config.seed), n_(automaton.dimension()),
          m_(automaton.stochastic_events().size()), ode_(n_ + m_, config.ode), threshold_(m_, 0.0),
          y_(n_ + m_, 0.0), scan_((kScanPoints + 1) * (n_ + m_)), probe_a_(n_ + m_), probe_b_(n_ + m_) {
        trace_.variables = a_.source().variables;
        for (const auto& label : a_.source().modes) {
            trace_.mode_labels.push_back(label.to_string());
        }
        trace_.seed = config.seed;
        trace_.t_end = config.t_end;
        field_ = [this](double, std::span<const double> y, std::span<double> dy) { evaluate(y, dy); };
    }

    Trace run() {
        try {
            q_ = a_.source().initial_mode;
            x_ = a_.source().initial_state();
            check_finite(x_);
            record(t_, "");
            chain(0);
            while (t_ < config_.t_end) {
                segment();
            }
            trace_.termination = Termination::Horizon;
        } catch (const Stop& stop) {
            trace_.termination = stop.termination;
            trace_.message = stop.message;
        } catch (const NegativeRate& e) {
            trace_.termination = Termination::NumericFailure;
            trace_.message = "negative rate " + format_number(e.rate) + " for event '" + e.event + "'";
        } catch (const EvalError& e) {
            trace_.termination = Termination::NumericFailure;
            trace_.message = e.what();
        }
        return std::move(trace_);
    }

  private:
    void evaluate(std::span<const double> y, std::span<double> dy) const {
        const auto x = y.first(n_);
        const auto& mode = a_.mode(q_);
        for (std::size_t j = 0; j < n_; ++j) {
            dy[j] = mode.rhs[j].real(x);
        }
        std::fill(dy.begin() + static_cast<std::ptrdiff_t>(n_), dy.end(), 0.0);
        for (const auto& group : mode.stochastic) {
            if (!group_enabled(group, x)) {
                continue;
            }
            const double rate = group.rate.real(x);
            if (rate < 0.0) {
                throw NegativeRate{a_.stochastic_events()[group.clock], rate};
            }
            dy[n_ + group.clock] = rate;
        }
    }

    bool group_enabled(const BoundAutomaton::EventGroup& group, std::span<const double> x) const {
        for (int i : group.transitions) {
            const auto& guard = a_.stochastic()[i].guard;
            if (guard.always_true() || guard.truth(x)) {
                return true;
            }
        }
        return false;
    }

    static void check_finite(std::span<const double> x) {
        for (double v : x) {
            if (!std::isfinite(v)) {
                throw Stop{Termination::NumericFailure, "non-finite state"};
            }
        }
    }

    void record(double t, const std::string& event) { trace_.samples.push_back({t, q_, x_, event}); }

    // Integrates the current mode until a jump or the horizon.
    void segment() {
        const auto& mode = a_.mode(q_);
        std::fill(threshold_.begin(), threshold_.end(), 0.0);
        for (const auto& group : mode.stochastic) {
            threshold_[group.clock] = rng_.exponential();
        }
        std::copy(x_.begin(), x_.end(), y_.begin());
        std::fill(y_.begin() + static_cast<std::ptrdiff_t>(n_), y_.end(), 0.0);
        ode_.restart(t_, y_, field_);

        int since_record = 0;
        while (ode_.t() < config_.t_end) {
            if (!ode_.step(config_.t_end, field_)) {
                throw Stop{Termination::NumericFailure, "integrator step size underflow at t=" + format_number(ode_.t())};
            }
            if (locate_jump()) {
                return;
            }
            t_ = ode_.t();
            std::copy(ode_.y().begin(), ode_.y().begin() + static_cast<std::ptrdiff_t>(n_), x_.begin());
            check_finite(x_);
            if (++since_record >= config_.stride || t_ >= config_.t_end) {
                record(t_, "");
                since_record = 0;
            }
        }
    }

    std::span<double> scan_point(int i) { return {scan_.data() + static_cast<std::size_t>(i) * (n_ + m_), n_ + m_}; }

    bool any_guard(const std::vector<int>& transitions, std::span<const double> a, std::span<const double> b) const {
        const auto xa = a.first(n_);
        const auto xb = b.first(n_);
        return std::any_of(transitions.begin(), transitions.end(),
                           [&](int i) { return a_.instantaneous()[i].guard.truth_over(xa, xb); });
    }

    // Looks for the earliest guard crossing or clock expiry in the last
    // accepted step; fires it and returns true if there is one.
    bool locate_jump() {
        const auto& mode = a_.mode(q_);
        const double t0 = ode_.t_previous();
        const double t1 = ode_.t();
        const double h = t1 - t0;

        double guard_time = std::numeric_limits<double>::infinity();
        double guard_from = t0;
        if (!mode.instantaneous.empty()) {
            for (int i = 0; i <= kScanPoints; ++i) {
                const double ti = i == kScanPoints ? t1 : t0 + h * i / kScanPoints;
                ode_.dense(ti, scan_point(i));
            }
            for (int i = 1; i <= kScanPoints; ++i) {
                if (!any_guard(mode.instantaneous, scan_point(i - 1), scan_point(i))) {
                    continue;
                }
                double lo = i == 1 ? t0 : t0 + h * (i - 1) / kScanPoints;
                double hi = i == kScanPoints ? t1 : t0 + h * i / kScanPoints;
                while (hi - lo > config_.guard_tolerance) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) {
                        break;
                    }
                    ode_.dense(lo, probe_a_);
                    ode_.dense(mid, probe_b_);
                    if (any_guard(mode.instantaneous, probe_a_, probe_b_)) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                guard_time = hi;
                guard_from = lo;
                break;
            }
        }

        double clock_time = std::numeric_limits<double>::infinity();
        int clock_group = -1;
        const auto y1 = ode_.y();
        for (std::size_t g = 0; g < mode.stochastic.size(); ++g) {
            const int c = mode.stochastic[g].clock;
            if (y1[n_ + c] < threshold_[c]) {
                continue;
            }
            double lo = t0;
            double hi = t1;
            for (int iter = 0; iter < 200; ++iter) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) {
                    break;
                }
                ode_.dense(mid, probe_a_);
                if (probe_a_[n_ + c] >= threshold_[c]) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if (hi < clock_time) {
                clock_time = hi;
                clock_group = static_cast<int>(g);
            }
        }

        if (std::isinf(guard_time) && clock_group < 0) {
            return false;
        }
        // Urgent transitions win ties.
        if (guard_time <= clock_time) {
            ode_.dense(guard_from, probe_a_);
            ode_.dense(guard_time, probe_b_);
            std::vector<int> candidates;
            for (int i : mode.instantaneous) {
                if (a_.instantaneous()[i].guard.truth_over(std::span<const double>(probe_a_).first(n_),
                                                           std::span<const double>(probe_b_).first(n_))) {
                    candidates.push_back(i);
                }
            }
            move_to(guard_time, probe_b_);
            jump(JumpKind::Instantaneous, candidates);
            chain(1);
        } else {
            ode_.dense(clock_time, probe_b_);
            move_to(clock_time, probe_b_);
            const auto& group = mode.stochastic[clock_group];
            std::vector<int> candidates;
            for (int i : group.transitions) {
                const auto& guard = a_.stochastic()[i].guard;
                if (guard.always_true() || guard.truth(x_)) {
                    candidates.push_back(i);
                }
            }
            if (candidates.empty()) {
                candidates = group.transitions;
            }
            jump(JumpKind::Stochastic, candidates);
            chain(0);
        }
        return true;
    }

    void move_to(double t, std::span<const double> y) {
        t_ = t;
        std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_), x_.begin());
        check_finite(x_);
        const auto& last = trace_.samples.back();
        if (!(last.t == t_ && last.mode == q_)) {
            record(t_, "");
        }
    }

    void jump(JumpKind kind, const std::vector<int>& candidates) {
        FireResult result = fire(a_, kind, candidates, x_, rng_);
        check_finite(result.after);
        JumpRecord record_entry;
        record_entry.t = t_;
        record_entry.kind = kind;
        record_entry.event = kind == JumpKind::Instantaneous ? a_.instantaneous()[result.transition].event
                                                             : a_.stochastic()[result.transition].event;
        record_entry.source = q_;
        record_entry.target = result.target;
        record_entry.before = x_;
        record_entry.after = result.after;
        q_ = result.target;
        x_ = std::move(result.after);
        record(t_, record_entry.event);
        trace_.jumps.push_back(std::move(record_entry));
    }

    // Fires already-enabled instantaneous transitions at the current instant.
    void chain(int fired) {
        for (;;) {
            std::vector<int> candidates;
            for (int i : a_.mode(q_).instantaneous) {
                if (a_.instantaneous()[i].guard.truth(x_)) {
                    candidates.push_back(i);
                }
            }
            if (candidates.empty()) {
                return;
            }
            if (fired >= config_.max_chain) {
                throw Stop{Termination::ChainLimitExceeded,
                           "more than " + std::to_string(config_.max_chain) +
                               " instantaneous transitions at t=" + format_number(t_)};
            }
            jump(JumpKind::Instantaneous, candidates);
            ++fired;
        }
    }

    const BoundAutomaton& a_;
    SimConfig config_;
    Rng rng_;
    std::size_t n_;
    std::size_t m_;
    Dopri5 ode_;
    Dopri5::Rhs field_;
    std::vector<double> threshold_;
    std::vector<double> y_;
    std::vector<double> scan_;
    std::vector<double> probe_a_;
    std::vector<double> probe_b_;
    Trace trace_;
    int q_ = 0;
    double t_ = 0.0;
    std::vector<double> x_;
};

} // namespace

Trace simulate(const BoundAutomaton& automaton, const SimConfig& config) {
    config.validate();
    return Run(automaton, config).run();
}

Trace simulate(const Tdsha& automaton, const SimConfig& config) {
    config.validate();
    const BoundAutomaton bound(automaton);
    return Run(bound, config).run();
}

} // namespace hype
