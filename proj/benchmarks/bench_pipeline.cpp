#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>
#include <string>

#include "hype/compiler.hpp"
#include "hype/ensemble.hpp"
#include "hype/parser.hpp"
#include "hype/simulator.hpp"

namespace {

std::string model_text(const char* name) {
    std::ifstream in(std::string(HYPE_MODELS_DIR) + "/" + name);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void BM_Parse(benchmark::State& state) {
    const auto text = model_text("orbiter_extended.hype");
    for (auto _ : state) benchmark::DoNotOptimize(hype::load_model(text));
}
BENCHMARK(BM_Parse);

void BM_Compile(benchmark::State& state, hype::PruneMode prune) {
    const auto model = hype::load_model(model_text("orbiter_extended.hype"));
    for (auto _ : state) benchmark::DoNotOptimize(hype::compile(model, {prune}));
}
BENCHMARK_CAPTURE(BM_Compile, final, hype::PruneMode::Final);
BENCHMARK_CAPTURE(BM_Compile, each_stage, hype::PruneMode::EachStage);

void BM_Simulate(benchmark::State& state, const char* name) {
    const auto automaton = hype::compile(hype::load_model(model_text(name))).automaton;
    const hype::BoundAutomaton bound(automaton);
    hype::SimConfig config;
    config.t_end = static_cast<double>(state.range(0));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        config.seed = seed++;
        benchmark::DoNotOptimize(hype::simulate(bound, config));
    }
}
BENCHMARK_CAPTURE(BM_Simulate, downloader, "downloader.hype")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Simulate, orbiter, "orbiter_extended.hype")->Arg(240)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& state) {
    const auto automaton = hype::compile(hype::load_model(model_text("downloader.hype"))).automaton;
    hype::EnsembleConfig config;
    config.runs = static_cast<int>(state.range(0));
    config.sim.t_end = 1000.0;
    for (auto _ : state) benchmark::DoNotOptimize(hype::run_ensemble(automaton, config));
}
BENCHMARK(BM_Ensemble)->Arg(16)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
