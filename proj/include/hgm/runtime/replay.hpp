#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hgm/runtime/events.hpp"
#include "hgm/tree/search_tree.hpp"

namespace hgm::runtime {

struct Divergence {
  std::uint64_t seq = 0;
  std::string message;
};

struct ReplayReport {
  std::optional<Divergence> divergence;  // first offending record, if any
  std::uint64_t events = 0;
  std::uint64_t decisions = 0;
  std::uint64_t eval_commits = 0;
  bool finished = false;   // log ends with FinalSelection
  bool completed = false;  // finished with exactly budget_B evaluations
  bool starved = false;

  bool ok() const noexcept { return !divergence.has_value(); }
};

// Re-drives a coordinator from the log: every Decision is re-derived from the
// replayed state and the keyed decision stream, every outcome is checked against
// a re-simulation of the synthetic environment, and every regenerated record
// (including counter snapshots) must equal the logged one byte for byte.
// Throws ParseError when the header is missing or the schema version differs.
ReplayReport replay(const EventLog& log);

// Tree implied by the log's ExpandCommit/EvalCommit records alone.
SearchTree rebuild_tree(const EventLog& log);

// Configuration recorded in the log header.
RunConfig logged_config(const EventLog& log);

}  // namespace hgm::runtime
