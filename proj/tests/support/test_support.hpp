#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hype/model.hpp"
#include "hype/simulator.hpp"
#include "hype/tdsha.hpp"

namespace hype::testing {

/// Directory of the bundled .hype models.
[[nodiscard]] std::string models_dir();
[[nodiscard]] std::string model_path(const std::string& name);
[[nodiscard]] std::string read_text(const std::string& path);
[[nodiscard]] HypeModel load_bundled(const std::string& name);

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
[[nodiscard]] double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic p-value of the one-sample KS statistic (with the usual
/// finite-n correction of the argument).
[[nodiscard]] double ks_p_value(double statistic, std::size_t n);

/// Random well-defined model text: a few subcomponents over private
/// influence names, controllers partitioning the events, an uncontrolled
/// system synchronized on exactly the shared events.
[[nodiscard]] std::string random_model_text(std::mt19937_64& rng);

/// Random automaton over a fixed event/variable vocabulary. Events carry
/// fixed resets and rates, so any two generated automata are compatible.
[[nodiscard]] Tdsha random_tdsha(std::mt19937_64& rng);

/// Order-free description of an automaton: one string per flow and edge,
/// with modes renamed through `mode_name`, stoichiometry keyed by variable
/// name, guards split into sorted conjuncts and resets sorted.
[[nodiscard]] std::vector<std::string> shape(const Tdsha& t, const std::function<std::string(int)>& mode_name);

/// True if the two automata coincide under the mode bijection `map`
/// (mode q of `a` corresponds to map(q) of `b`), ignoring labels.
[[nodiscard]] bool isomorphic_under(const Tdsha& a, const Tdsha& b, const std::function<int(int)>& map);

/// Canonical trace text: trace CSV followed by events CSV.
[[nodiscard]] std::string canonical(const Trace& trace);

} // namespace hype::testing
