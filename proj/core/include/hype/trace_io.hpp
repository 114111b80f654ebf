#pragma once

#include <iosfwd>
#include <string>

#include "hype/ensemble.hpp"
#include "hype/simulator.hpp"

namespace hype {

/// Numbers in every text output use this form (17 significant digits).
[[nodiscard]] std::string format_exact(double value);

/// Header `time,mode_id,<variables...>,event`, one row per sample.
void write_trace_csv(std::ostream& out, const Trace& trace);

/// Header `time,event,kind,src_mode,dst_mode`, one row per jump.
void write_events_csv(std::ostream& out, const Trace& trace);

/// Termination, message, seed, horizon, mode labels and jump counts.
[[nodiscard]] std::string trace_meta_json(const Trace& trace);

/// Per-event statistics, occupancy and per-run outcomes.
[[nodiscard]] std::string ensemble_summary_json(const EnsembleSummary& summary);

} // namespace hype
