#include <doctest.h>

#include <random>
#include <set>

#include "hype/error.hpp"
#include "hype/parser.hpp"
#include "test_support.hpp"

using namespace hype;

namespace {

const char* kSmall = R"(model Small;
var X;
type const = 1;
iv i = X;
event go, ~tick;
ec(init) = (true, X' = 1);
ec(go) = (X >= 2, X' = 0);
ec(~tick) = (0.5 * X, true);
subcomponent S = init:(i, 1, const).S + go:(i, 0, const).S + ~tick:(i, 1, const).S;
controller C = go.~tick.C;
system Top = S sync{init, go, tick} init.C;
)";

std::size_t count(const std::string& text, const std::string& what) {
    std::size_t n = 0;
    for (auto at = text.find(what); at != std::string::npos; at = text.find(what, at + 1)) ++n;
    return n;
}

} // namespace

TEST_SUITE("parser") {

TEST_CASE("orbiter with downloader") {
    const auto m = hype::testing::load_bundled("orbiter_extended.hype");
    CHECK(m.name == "OrbiterExtended");
    REQUIRE(m.subcomponents.size() == 6);
    std::vector<std::string> names;
    for (const auto& s : m.subcomponents) names.push_back(s.name);
    CHECK(names == std::vector<std::string>{"Heat", "Shade", "Sun", "Cool", "Time", "Dwnldr"});
    CHECK(m.controllers.size() == 4);
    CHECK(m.find_controller("Con_dw") != nullptr);
    CHECK(m.find_controller_composition("Con") != nullptr);
    CHECK(m.instantaneous_events().size() + m.stochastic_events().size() == 9);
    REQUIRE(m.controlled);
    CHECK(m.controlled->sync.size() == 9);
}

TEST_CASE("empty input") {
    const auto result = parse_model("");
    REQUIRE_FALSE(result.ok());
    CHECK(result.errors.front().message.find("expected model header") != std::string::npos);
}

TEST_CASE("missing file") {
    const auto result = parse_model_file("/nonexistent/model.hype");
    REQUIRE_FALSE(result.ok());
    CHECK(result.errors.front().message.find("cannot read") != std::string::npos);
    CHECK_THROWS_AS((void)load_model_file("/nonexistent/model.hype"), ModelError);
}

TEST_CASE("instantaneous event condition") {
    const auto m = load_model(R"(model M; param k2 = 250; var K; type const = 1; iv h = K; event on;
        ec(init) = (true, K' = 275);
        ec(on) = (K <= 250, true);
        subcomponent Heat = init:(h, 0, const).Heat + on:(h, 1, const).Heat;
        controller C = on.0;
        system Top = Heat sync{init, on} init.C;)");
    const auto* ec = m.condition_of("on");
    REQUIRE(ec != nullptr);
    CHECK(ec->kind == EventKind::Instantaneous);
    CHECK(ec->activation == parse_expression("K <= 250"));
    CHECK(ec->reset.empty());
}

TEST_CASE("stochastic marks") {
    const auto m = load_model(kSmall);
    CHECK(m.event_kind("tick") == EventKind::Stochastic);
    CHECK(m.condition_of("tick")->kind == EventKind::Stochastic);
    // the mark is optional at use sites
    CHECK(parse_model(std::string(kSmall).replace(std::string(kSmall).find("~tick:"), 6, "tick:")).ok());
    // but wrong on an instantaneous event
    const auto bad = parse_model(std::string(kSmall).replace(std::string(kSmall).find("go.~tick"), 2, "~go"));
    CHECK_FALSE(bad.ok());
}

TEST_CASE("comments and signed parameters") {
    const auto m = load_model(std::string("# leading comment\n") + kSmall + "# trailing\n");
    CHECK(m.name == "Small");
    const auto n = load_model(std::string(kSmall).replace(std::string(kSmall).find("var X;"), 6,
                                                          "param neg = -2.5; # inline\nvar X;"));
    CHECK(n.parameter_values().at("neg") == -2.5);
}

TEST_CASE("round trip of bundled models") {
    for (const char* name : {"downloader.hype", "orbiter_extended.hype", "orbiter_tempdep.hype"}) {
        const auto m = hype::testing::load_bundled(name);
        const std::string printed = pretty_print(m);
        const auto again = parse_model(printed);
        CHECK_MESSAGE(again.ok(), name << "\n" << printed);
        REQUIRE(again.model);
        CHECK(*again.model == m);
        CHECK(pretty_print(*again.model) == printed);
    }
}

TEST_CASE("round trip preserves event kinds") {
    const auto m = load_model(kSmall);
    const auto again = load_model(pretty_print(m));
    CHECK(again.condition_of("tick")->kind == EventKind::Stochastic);
    CHECK(again.condition_of("go")->kind == EventKind::Instantaneous);
    CHECK(again.condition_of("tick")->activation == m.condition_of("tick")->activation);
}

TEST_CASE("single subcomponent prints one block") {
    const auto printed = pretty_print(load_model(kSmall));
    CHECK(count(printed, "subcomponent ") == 1);
}

TEST_CASE("random well-formed models parse after printing") {
    std::mt19937_64 rng(20240517);
    for (int i = 0; i < 200; ++i) {
        const std::string text = hype::testing::random_model_text(rng);
        const auto first = parse_model(text);
        std::string diagnostics;
        for (const auto& e : first.errors) diagnostics += e.to_string() + "\n";
        REQUIRE_MESSAGE(first.ok(), text << "\n" << diagnostics);
        const auto second = parse_model(pretty_print(*first.model));
        REQUIRE(second.ok());
        CHECK(*second.model == *first.model);
    }
}

TEST_CASE("error recovery reports independent errors") {
    std::string text = "model Broken;\nvar X;\ntype const = 1;\niv i = X;\n";
    for (int k = 0; k < 12; ++k) {
        text += "param p" + std::to_string(k) + " = ;\n";
    }
    const auto result = parse_model(text);
    std::set<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& e : result.errors) {
        if (!e.violation) spans.insert({e.span.line, e.span.column});
    }
    CHECK(spans.size() >= 10);
    for (const auto& e : result.errors) {
        CHECK_FALSE(e.message.empty());
    }
}

TEST_CASE("syntax errors carry spans and expectations") {
    const auto result = parse_model("model M;\nvar X\nevent a;\n", "f.hype");
    REQUIRE_FALSE(result.errors.empty());
    const auto& e = result.errors.front();
    CHECK(e.span.file == "f.hype");
    CHECK(e.span.line >= 2);
    CHECK_FALSE(e.expected.empty());
    CHECK(e.to_string().rfind("f.hype:", 0) == 0);
}

TEST_CASE("expression syntax") {
    CHECK(parse_expression("a <= b") == Expr::binary(Op::Le, Expr::name("a"), Expr::name("b")));
    CHECK(parse_expression("-2") == Expr::number(-2));
    CHECK_THROWS((void)parse_expression("a < b < c"));
    CHECK_THROWS((void)parse_expression("1 +"));
    CHECK(parse_expression("a + (if x > 0 then 1 else 2)").op() == Op::Add);
}

}
