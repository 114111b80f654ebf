#pragma once

#include <string>
#include <vector>

#include "hype/model.hpp"
#include "hype/tdsha.hpp"

namespace hype {

enum class PruneMode : std::uint8_t { Final, EachStage, Off };

[[nodiscard]] std::string to_string(PruneMode mode);
/// Accepts "final", "each-stage" and "off"; throws ArgumentError otherwise.
[[nodiscard]] PruneMode parse_prune_mode(std::string_view text);

struct CompileOptions {
    PruneMode prune = PruneMode::Final;
};

struct StageReport {
    std::string stage;
    std::size_t modes_before = 0;
    std::size_t modes_after = 0;
    std::size_t transitions = 0;
    double seconds = 0.0;
};

struct CompileReport {
    /// In pipeline order: leaves first, then each product, the final one last.
    std::vector<StageReport> stages;
    std::vector<std::string> warnings;
    std::size_t modes_before_prune = 0;
    std::size_t modes_after_prune = 0;
};

struct Compilation {
    Tdsha automaton;
    CompileReport report;
};

/// One mode per influence of S; every mode reacts to every event of S.
/// `arguments` replace the formal parameters (defaults to the formals).
[[nodiscard]] Tdsha compile_subcomponent(const Subcomponent& subcomponent, const HypeModel& model,
                                         const std::vector<std::string>* arguments = nullptr);

/// Product over an uncontrolled composition tree.
[[nodiscard]] Tdsha compile_uncontrolled(const CompositionTree& tree, const HypeModel& model);

/// One mode per derivative; edges carry the event conditions.
[[nodiscard]] Tdsha compile_seq_controller(const SequentialController& controller, const HypeModel& model);
[[nodiscard]] Tdsha compile_seq_controller(const ControllerTerm& term, const HypeModel& model);

/// Product over a controller composition tree.
[[nodiscard]] Tdsha compile_controller(const CompositionTree& tree, const HypeModel& model);

/// The whole model: T(Sigma) synchronized with T(Con) over the top-level set.
/// Throws CompileError if the model is invalid or a product fails.
[[nodiscard]] Compilation compile(const HypeModel& model, const CompileOptions& options = {});

} // namespace hype
