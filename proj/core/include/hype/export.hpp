#pragma once

#include <string>

#include "hype/compiler.hpp"
#include "hype/tdsha.hpp"

namespace hype {

/// Machine-readable automaton document (layout in docs/tdsha-format.md).
[[nodiscard]] std::string automaton_json(const Tdsha& automaton);

/// Graphviz digraph: modes as nodes annotated with their flows,
/// instantaneous edges solid, stochastic edges dashed.
[[nodiscard]] std::string automaton_dot(const Tdsha& automaton);

/// Stage counts, warnings and timings of a compilation.
[[nodiscard]] std::string report_json(const CompileReport& report);

} // namespace hype
