#include <doctest.h>

#include <random>
#include <set>

#include "hype/compiler.hpp"
#include "hype/error.hpp"
#include "hype/parser.hpp"
#include "test_support.hpp"

using namespace hype;
using hype::testing::load_bundled;

namespace {

std::set<std::string> labels(const Tdsha& t) {
    std::set<std::string> out;
    for (const auto& m : t.modes) out.insert(m.to_string());
    return out;
}

void check_cardinalities(const Subcomponent& s, const HypeModel& m) {
    const auto t = compile_subcomponent(s, m);
    const auto is = influences_of(s);
    const auto ev = events_of(s);
    CHECK(t.modes.size() == is.size());
    CHECK(t.flows.size() == is.size());
    CHECK(t.instantaneous.size() + t.stochastic.size() == is.size() * ev.size());
    for (int q = 0; q < static_cast<int>(t.modes.size()); ++q) {
        for (const auto& e : ev) {
            std::size_t out = 0;
            for (const auto& tr : t.instantaneous) out += tr.source == q && tr.event == e;
            for (const auto& tr : t.stochastic) out += tr.source == q && tr.event == e;
            CHECK(out == 1);
        }
    }
    for (const auto& tr : t.instantaneous) {
        CHECK(tr.guard.is_true());
        CHECK(tr.reset.empty());
        CHECK(tr.weight == 1.0);
    }
    for (const auto& tr : t.stochastic) {
        CHECK(tr.guard.is_true());
        CHECK(tr.reset.empty());
        CHECK(tr.rate == m.condition_of(tr.event)->activation);
    }
}

} // namespace

TEST_SUITE("compiler") {

TEST_CASE("downloader subcomponent") {
    const auto m = load_bundled("downloader.hype");
    const auto t = compile_subcomponent(*m.find_subcomponent("Dwnldr"), m);
    REQUIRE(t.modes.size() == 2);
    CHECK(t.modes[t.initial_mode].to_string() == "(dw, r, const)");
    CHECK(t.initial_point.empty());
    REQUIRE(t.flows.size() == 2);
    CHECK(t.flows[0].stoichiometry == std::vector<double>{1.0});
    CHECK(t.flows[0].rate == Expr::name("r") * Expr::number(1));
    CHECK(t.flows[1].rate == Expr::number(0) * Expr::number(1));
    CHECK(t.stochastic.size() == 4);
    CHECK(t.instantaneous.empty());
    CHECK(t.events() == std::set<std::string>{"init", "request", "completed"});
}

TEST_CASE("cooler and heater subcomponents") {
    const auto m = load_bundled("orbiter_extended.hype");
    const auto cool = compile_subcomponent(*m.find_subcomponent("Cool"), m);
    CHECK(cool.modes.size() == 1);
    REQUIRE(cool.flows.size() == 1);
    CHECK(cool.flows[0].rate == Expr::number(-1) * Expr::name("K"));
    CHECK(cool.instantaneous.empty());
    CHECK(cool.stochastic.empty());
    const auto heat = compile_subcomponent(*m.find_subcomponent("Heat"), m);
    CHECK(heat.modes.size() == 2);
    CHECK(heat.instantaneous.size() == 4);
}

TEST_CASE("cardinality law on bundled subcomponents") {
    for (const char* name : {"downloader.hype", "orbiter_extended.hype", "orbiter_tempdep.hype"}) {
        const auto m = load_bundled(name);
        for (const auto& s : m.subcomponents) check_cardinalities(s, m);
    }
}

TEST_CASE("cardinality law on random subcomponents") {
    std::mt19937_64 rng(77);
    int seen = 0;
    while (seen < 100) {
        const auto m = load_model(hype::testing::random_model_text(rng));
        for (const auto& s : m.subcomponents) {
            check_cardinalities(s, m);
            ++seen;
        }
    }
}

TEST_CASE("uncontrolled systems") {
    const auto m = load_bundled("orbiter_extended.hype");
    const auto sys = compile_uncontrolled(m.find_system("Sys")->tree, m);
    CHECK(sys.modes.size() == 16);
    for (const auto& tr : sys.instantaneous) {
        CHECK(tr.guard.is_true());
        CHECK(tr.reset.empty());
    }
    const auto pair = compile_uncontrolled(
        CompositionTree::sync(CompositionTree::leaf("Heat"), {"init"}, CompositionTree::leaf("Shade")), m);
    CHECK(pair.modes.size() == 4);
    for (int q = 0; q < 4; ++q) {
        std::set<std::string> vars;
        std::size_t flows = 0;
        for (const auto& f : pair.flows) flows += f.mode == q;
        CHECK(flows == 2);
    }
    const auto leaf = compile_uncontrolled(CompositionTree::leaf("Heat"), m);
    CHECK(leaf == compile_subcomponent(*m.find_subcomponent("Heat"), m));
}

TEST_CASE("sequential controllers") {
    const auto m = load_bundled("orbiter_extended.hype");
    const auto dw = compile_seq_controller(*m.find_controller("Con_dw"), m);
    REQUIRE(dw.modes.size() == 2);
    CHECK(dw.flows.empty());
    REQUIRE(dw.stochastic.size() == 2);
    const auto& request = dw.stochastic[0];
    CHECK(request.event == "request");
    CHECK(request.source == dw.initial_mode);
    CHECK(dw.modes[request.target].to_string() == "completed.Con_dw");
    CHECK(request.rate == Expr::name("lambda_r"));
    CHECK(request.reset.empty());
    const auto& completed = dw.stochastic[1];
    CHECK(completed.event == "completed");
    CHECK(completed.rate == parse_expression("lambda / (mu + D)"));
    REQUIRE(completed.reset.size() == 1);
    CHECK(completed.reset[0].variable == "D");
    CHECK(completed.target == dw.initial_mode);

    const auto sun = compile_seq_controller(*m.find_controller("Con_s"), m);
    REQUIRE(sun.instantaneous.size() == 2);
    CHECK(sun.instantaneous[0].event == "light");
    CHECK(sun.instantaneous[0].guard == parse_expression("T = 12"));
    CHECK(sun.instantaneous[0].reset.empty());
    CHECK(sun.instantaneous[1].guard == parse_expression("T = 24"));
    REQUIRE(sun.instantaneous[1].reset.size() == 1);
    CHECK(sun.instantaneous[1].reset[0].variable == "T");
    CHECK(sun.instantaneous[0].weight == 1.0);
    // the init reset becomes the initial point
    CHECK(sun.initial_point.size() == 3);

    const auto zero = compile_seq_controller(ControllerTerm::zero(), m);
    CHECK(zero.modes.size() == 1);
    CHECK(zero.instantaneous.empty());
    CHECK(zero.stochastic.empty());
}

TEST_CASE("controller products") {
    const auto m = load_bundled("orbiter_extended.hype");
    using CT = CompositionTree;
    const auto three = compile_controller(
        CT::sync(CT::sync(CT::leaf("Con_h"), {}, CT::leaf("Con_d")), {}, CT::leaf("Con_s")), m);
    CHECK(three.modes.size() == 8);
    // nothing synchronized: every edge comes from one factor
    CHECK(three.instantaneous.size() == 3 * 2 * 4);
    const auto single = compile_controller(CT::leaf("Con_h"), m);
    CHECK(single == compile_seq_controller(*m.find_controller("Con_h"), m));
    const auto full = compile_controller(m.find_controller_composition("Con")->tree, m);
    CHECK(full.modes.size() == 16);
}

TEST_CASE("downloader pipeline") {
    const auto m = load_bundled("downloader.hype");
    const auto c = compile(m);
    CHECK(c.report.modes_before_prune == 4);
    CHECK(c.report.modes_after_prune == 2);
    CHECK(c.automaton.modes.size() == 2);
    REQUIRE_FALSE(c.report.stages.empty());
    CHECK(c.report.stages.back().modes_before == 4);
    CHECK(c.report.warnings.empty());
    const auto off = compile(m, {PruneMode::Off});
    CHECK(off.automaton.modes.size() == 4);
    CHECK(prune_unreachable(off.automaton) == c.automaton);
}

TEST_CASE("orbiter pipeline") {
    const auto m = load_bundled("orbiter_extended.hype");
    const auto c = compile(m);
    CHECK(c.report.modes_before_prune == 256);
    CHECK(c.report.modes_after_prune == 16);
    const auto each = compile(m, {PruneMode::EachStage});
    CHECK(labels(each.automaton) == labels(c.automaton));
    CHECK(each.automaton.instantaneous.size() == c.automaton.instantaneous.size());
    CHECK(each.automaton.stochastic.size() == c.automaton.stochastic.size());
    CHECK(prune_unreachable(compile(m, {PruneMode::Off}).automaton) == c.automaton);
}

TEST_CASE("event conditions come from the controller") {
    const auto m = load_bundled("orbiter_extended.hype");
    const auto t = compile(m).automaton;
    for (const auto& tr : t.instantaneous) {
        const auto* ec = m.condition_of(tr.event);
        REQUIRE(ec != nullptr);
        CHECK(tr.guard == ec->activation);
        CHECK(tr.reset == ec->reset);
    }
    for (const auto& tr : t.stochastic) {
        const auto* ec = m.condition_of(tr.event);
        CHECK(tr.rate == ec->activation);
        CHECK(tr.reset == ec->reset);
        CHECK(tr.guard.is_true());
    }
    CHECK_FALSE(rate_inconsistency(t));
    // init selects the start and never appears as an edge
    for (const auto& tr : t.instantaneous) CHECK(tr.event != "init");
}

TEST_CASE("renaming a subcomponent changes nothing but names") {
    std::string text = hype::testing::read_text(hype::testing::model_path("orbiter_extended.hype"));
    std::string renamed = text;
    for (auto at = renamed.find("Heat"); at != std::string::npos; at = renamed.find("Heat", at + 1)) {
        renamed.replace(at, 4, "Warm");
    }
    const auto a = compile(load_model(text)).automaton;
    const auto b = compile(load_model(renamed)).automaton;
    CHECK(hype::testing::isomorphic_under(a, b, [](int q) { return q; }));
}

TEST_CASE("defaulted variables are reported") {
    const auto m = load_model(R"(model M; var X, Y; type const = 1; iv i = X; iv j = Y; event a;
        ec(init) = (true, X' = 1); ec(a) = (X >= 2, true);
        subcomponent S = init:(i, 1, const).S + a:(i, 0, const).S;
        subcomponent R = init:(j, 1, const).R;
        controller C = a.0;
        system Top = (S sync{init} R) sync{init, a} init.C;)");
    const auto c = compile(m);
    REQUIRE(c.report.warnings.size() == 1);
    CHECK(c.report.warnings[0].find("Y") != std::string::npos);
}

TEST_CASE("invalid models do not compile") {
    auto m = load_bundled("downloader.hype");
    m.conditions.pop_back();
    CHECK_THROWS_AS((void)compile(m), CompileError);
    CHECK(parse_prune_mode("each-stage") == PruneMode::EachStage);
    CHECK_THROWS_AS((void)parse_prune_mode("sometimes"), ArgumentError);
}

}
