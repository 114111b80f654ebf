#include <doctest.h>

#include <cmath>

#include "hype/compiler.hpp"
#include "hype/error.hpp"
#include "hype/parser.hpp"
#include "hype/simulator.hpp"
#include "test_support.hpp"

using namespace hype;
using hype::testing::load_bundled;

namespace {

Tdsha modes(int n, std::vector<std::string> vars) {
    Tdsha t;
    for (int q = 0; q < n; ++q) t.modes.push_back(ModeLabel::influence("m" + std::to_string(q)));
    t.variables = std::move(vars);
    return t;
}

void add_flow(Tdsha& t, int mode, std::vector<double> s, const std::string& rate) {
    t.flows.push_back({mode, std::move(s), parse_expression(rate)});
}

void add_instant(Tdsha& t, int from, int to, const std::string& event, const std::string& guard,
                 Reset reset = {}, double weight = 1.0) {
    t.instantaneous.push_back({from, to, parse_expression(guard), std::move(reset), weight, event});
    t.instantaneous_events.insert(event);
}

void add_stochastic(Tdsha& t, int from, int to, const std::string& event, const std::string& rate,
                    Reset reset = {}) {
    t.stochastic.push_back({from, to, Expr::boolean(true), std::move(reset), parse_expression(rate), event});
    t.stochastic_events.insert(event);
}

SimConfig config(double t_end, std::uint64_t seed = 1) {
    SimConfig c;
    c.t_end = t_end;
    c.seed = seed;
    return c;
}

} // namespace

TEST_SUITE("simulator") {

TEST_CASE("constant flow reaches the horizon exactly") {
    auto t = modes(1, {"T"});
    add_flow(t, 0, {1.0}, "1");
    const auto trace = simulate(t, config(24.0));
    CHECK(trace.termination == Termination::Horizon);
    REQUIRE_FALSE(trace.samples.empty());
    CHECK(trace.samples.back().t == 24.0);
    CHECK(trace.samples.back().x[0] == doctest::Approx(24.0).epsilon(1e-12));
    CHECK(trace.samples.front().t == 0.0);
}

TEST_CASE("linear relaxation matches its closed form") {
    auto t = modes(1, {"K"});
    t.initial_point = {{"K", Expr::number(275)}};
    add_flow(t, 0, {1.0}, "600");
    add_flow(t, 0, {-1.0}, "K");
    const auto trace = simulate(t, config(10.0));
    double sum = 0.0;
    for (const auto& s : trace.samples) {
        const double exact = 600.0 - 325.0 * std::exp(-s.t);
        sum += (s.x[0] - exact) * (s.x[0] - exact);
    }
    CHECK(std::sqrt(sum / static_cast<double>(trace.samples.size())) <= 1e-6);
}

TEST_CASE("weighted choice among instantaneous candidates") {
    auto t = modes(3, {"x"});
    add_instant(t, 0, 1, "a", "true", {}, 1.0);
    add_instant(t, 0, 2, "a", "true", {}, 3.0);
    const BoundAutomaton bound(t);
    Rng rng(5);
    const std::vector<int> candidates{0, 1};
    const std::vector<double> x{0.0};
    const int draws = 100000;
    int first = 0;
    for (int i = 0; i < draws; ++i) first += fire(bound, JumpKind::Instantaneous, candidates, x, rng).transition == 0;
    CHECK(std::abs(first / static_cast<double>(draws) - 0.25) <= 0.01);
}

TEST_CASE("a single candidate is taken without drawing") {
    auto t = modes(2, {"x"});
    add_instant(t, 0, 1, "a", "true", {{"x", parse_expression("x + 1")}});
    const BoundAutomaton bound(t);
    Rng rng(9), fresh(9);
    const std::vector<int> candidates{0};
    const std::vector<double> x{2.0};
    for (int i = 0; i < 10; ++i) {
        const auto r = fire(bound, JumpKind::Instantaneous, candidates, x, rng);
        CHECK(r.transition == 0);
        CHECK(r.target == 1);
        CHECK(r.after == std::vector<double>{3.0});
    }
    CHECK(rng.uniform() == fresh.uniform());
}

TEST_CASE("resets are simultaneous") {
    auto t = modes(2, {"x", "y"});
    add_instant(t, 0, 1, "swap", "true", {{"x", Expr::name("y")}, {"y", Expr::name("x")}});
    const BoundAutomaton bound(t);
    Rng rng(1);
    const std::vector<int> candidates{0};
    const std::vector<double> x{1.0, 2.0};
    CHECK(fire(bound, JumpKind::Instantaneous, candidates, x, rng).after == std::vector<double>{2.0, 1.0});
}

TEST_CASE("guards fire as soon as they become true") {
    auto t = modes(2, {"T"});
    add_flow(t, 0, {1.0}, "1");
    add_instant(t, 0, 1, "a", "T >= 1.5");
    const auto trace = simulate(t, config(5.0));
    REQUIRE(trace.jumps.size() == 1);
    CHECK(std::abs(trace.jumps[0].t - 1.5) <= 1e-8);
    CHECK(trace.jumps[0].event == "a");
    CHECK(trace.jumps[0].kind == JumpKind::Instantaneous);
    CHECK(trace.samples.back().mode == 1);
}

TEST_CASE("equality guards on a clock") {
    auto t = modes(2, {"T"});
    add_flow(t, 0, {1.0}, "1");
    add_flow(t, 1, {1.0}, "1");
    add_instant(t, 0, 1, "light", "T = 12");
    add_instant(t, 1, 0, "dark", "T = 24", {{"T", Expr::number(0)}});
    const auto trace = simulate(t, config(100.0));
    REQUIRE(trace.jumps.size() == 8);
    for (std::size_t i = 0; i < trace.jumps.size(); ++i) {
        const double expected = 12.0 * static_cast<double>(i + 1);
        CHECK(std::abs(trace.jumps[i].t - expected) <= 1e-6);
    }
    CHECK(trace.termination == Termination::Horizon);
}

TEST_CASE("the dark reset only touches the clock") {
    const auto c = compile(load_bundled("orbiter_extended.hype"));
    const auto trace = simulate(c.automaton, config(60.0, 3));
    const auto t_index = *c.automaton.variable_index("T");
    int seen = 0;
    for (const auto& j : trace.jumps) {
        if (j.event != "dark") continue;
        ++seen;
        for (std::size_t i = 0; i < j.before.size(); ++i) {
            if (static_cast<int>(i) == t_index) CHECK(j.after[i] == 0.0);
            else CHECK(j.after[i] == j.before[i]);
        }
    }
    CHECK(seen == 2);
}

TEST_CASE("stochastic self-loop fires at its rate") {
    auto t = modes(1, {"x"});
    add_stochastic(t, 0, 0, "s", "2");
    const auto trace = simulate(t, config(1000.0, 11));
    const double n = static_cast<double>(trace.jumps.size());
    CHECK(std::abs(n - 2000.0) <= 4.0 * std::sqrt(2000.0));
    for (const auto& j : trace.jumps) CHECK(j.kind == JumpKind::Stochastic);
}

TEST_CASE("state-dependent rates integrate the hazard") {
    // rate x with dx/dt = 1 from 0: P(no firing by t) = exp(-t^2/2)
    auto t = modes(2, {"x"});
    add_flow(t, 0, {1.0}, "1");
    add_stochastic(t, 0, 1, "s", "x");
    std::vector<double> times;
    for (std::uint64_t seed = 1; seed <= 2000; ++seed) {
        const auto trace = simulate(t, config(20.0, seed));
        REQUIRE(trace.jumps.size() == 1);
        times.push_back(trace.jumps[0].t);
    }
    const double d = hype::testing::ks_statistic(times, [](double s) { return 1.0 - std::exp(-s * s / 2.0); });
    CHECK(hype::testing::ks_p_value(d, times.size()) >= 0.001);
}

TEST_CASE("same seed, same trace") {
    const auto c = compile(load_bundled("downloader.hype"));
    const auto a = simulate(c.automaton, config(500.0, 42));
    const auto b = simulate(c.automaton, config(500.0, 42));
    const auto other = simulate(c.automaton, config(500.0, 43));
    CHECK(hype::testing::canonical(a) == hype::testing::canonical(b));
    CHECK(hype::testing::canonical(a) != hype::testing::canonical(other));
}

TEST_CASE("downloader sawtooth") {
    const auto c = compile(load_bundled("downloader.hype"));
    const auto trace = simulate(c.automaton, config(1000.0, 7));
    CHECK(trace.termination == Termination::Horizon);
    CHECK_FALSE(trace.jumps.empty());
    for (const auto& j : trace.jumps) {
        if (j.event == "completed") CHECK(j.after[0] == 0.0);
        if (j.event == "request") CHECK(j.after == j.before);
    }
    for (const auto& s : trace.samples) CHECK(s.x[0] >= 0.0);
}

TEST_CASE("instantaneous chains are cut off") {
    auto t = modes(2, {"x"});
    add_instant(t, 0, 1, "a", "true");
    add_instant(t, 1, 0, "b", "true");
    auto cfg = config(10.0);
    cfg.max_chain = 50;
    const auto trace = simulate(t, cfg);
    CHECK(trace.termination == Termination::ChainLimitExceeded);
    CHECK(trace.samples.back().t == 0.0);
    CHECK(trace.jumps.size() == 50);
    CHECK_FALSE(trace.message.empty());
}

TEST_CASE("a guard that stays true after its own jump is a chain") {
    auto t = modes(1, {"x"});
    add_flow(t, 0, {1.0}, "1");
    add_instant(t, 0, 0, "a", "x >= 1");
    const auto trace = simulate(t, config(10.0));
    CHECK(trace.termination == Termination::ChainLimitExceeded);
    CHECK(std::abs(trace.jumps.back().t - 1.0) <= 1e-8);
}

TEST_CASE("numeric failures end the run") {
    auto negative = modes(1, {"x"});
    add_stochastic(negative, 0, 0, "s", "-1");
    const auto a = simulate(negative, config(5.0));
    CHECK(a.termination == Termination::NumericFailure);
    CHECK_FALSE(a.message.empty());

    auto pole = modes(1, {"x"});
    pole.initial_point = {{"x", Expr::number(1)}};
    add_flow(pole, 0, {1.0}, "x * x");  // blows up at t = 1
    const auto b = simulate(pole, config(5.0));
    CHECK(b.termination == Termination::NumericFailure);
    CHECK(b.samples.back().t < 1.0 + 1e-6);

    auto division = modes(1, {"x"});
    add_flow(division, 0, {1.0}, "1 / x");
    CHECK(simulate(division, config(5.0)).termination == Termination::NumericFailure);
}

TEST_CASE("stride thins flow samples but keeps jumps and the horizon") {
    auto t = modes(2, {"T"});
    add_flow(t, 0, {1.0}, "1");
    add_flow(t, 1, {1.0}, "1");
    add_instant(t, 0, 1, "a", "T >= 3");
    auto fine = config(10.0);
    fine.ode.max_step = 0.01;
    auto coarse = fine;
    coarse.stride = 50;
    const auto all = simulate(t, fine);
    const auto few = simulate(t, coarse);
    CHECK(few.samples.size() < all.samples.size());
    CHECK(few.samples.back().t == 10.0);
    CHECK(few.jumps.size() == 1);
    int tagged = 0;
    for (const auto& s : few.samples) tagged += s.event == "a";
    CHECK(tagged == 1);
}

TEST_CASE("configuration is validated") {
    SimConfig c;
    c.t_end = 0.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = SimConfig{};
    c.stride = 0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = SimConfig{};
    c.max_chain = 0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = SimConfig{};
    c.ode.rtol = -1.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    CHECK_NOTHROW(SimConfig{}.validate());
}

TEST_CASE("unknown names are rejected when binding") {
    auto t = modes(1, {"x"});
    add_flow(t, 0, {1.0}, "y");
    CHECK_THROWS_AS(BoundAutomaton{t}, EvalError);
}

}
