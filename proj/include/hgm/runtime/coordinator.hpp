#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "hgm/env/executor.hpp"
#include "hgm/policy/policy.hpp"
#include "hgm/runtime/events.hpp"
#include "hgm/runtime/run_config.hpp"
#include "hgm/tree/search_tree.hpp"

namespace hgm::runtime {

// An action handed to a worker.
struct Dispatch {
  std::uint64_t action_seq = 0;
  policy::Action action;
  env::AgentHandle handle = 0;  // parent for Expand, agent for Evaluate
};

// A worker's report for one dispatched action.
struct Completion {
  std::uint64_t action_seq = 0;
  bool failed = false;
  env::AgentHandle child = 0;  // Expand
  bool success = false;        // Evaluate
};

// Owns all mutable search state. Every decision, dispatch and commit goes
// through here and is written to the event log in the order it happens.
// Not thread-safe: drivers call it from a single coordinating thread.
class Coordinator {
 public:
  Coordinator(const RunConfig& cfg, EventLog& log, env::AgentHandle root_handle);
  // Continues from an existing quiescent tree; handles[i] belongs to node i.
  Coordinator(const RunConfig& cfg, EventLog& log, SearchTree tree, std::vector<env::AgentHandle> handles,
              std::uint64_t first_action_seq);

  void log_run_start();

  policy::BudgetState budget() const;
  bool budget_complete() const { return tree_.total_evaluations() >= cfg_.budget_B; }

  // Decides and registers the next action, or returns nothing when the budget is
  // fully allocated or the policy must wait for in-flight work.
  std::optional<Dispatch> next_dispatch();
  void complete(const Completion& completion);
  // Drops all in-flight actions (budget exhausted); logged in action order.
  void discard_inflight();
  void mark_starved();
  AgentId finalize();

  const SearchTree& tree() const noexcept { return tree_; }
  const RunConfig& config() const noexcept { return cfg_; }
  env::AgentHandle handle_of(AgentId id) const { return handles_.at(id.index); }
  const std::vector<env::AgentHandle>& handles() const noexcept { return handles_; }
  std::optional<policy::Action> inflight_action(std::uint64_t action_seq) const;
  std::size_t inflight_count() const noexcept { return inflight_.size(); }
  std::uint64_t next_action_seq() const noexcept { return next_action_; }

 private:
  void undo(const policy::Action& action);

  RunConfig cfg_;
  EventLog& log_;
  SearchTree tree_;
  std::vector<env::AgentHandle> handles_;
  std::unique_ptr<policy::SearchPolicy> policy_;
  std::map<std::uint64_t, policy::Action> inflight_;
  std::uint64_t next_action_ = 0;
  std::uint64_t logical_time_ = 0;
};

}  // namespace hgm::runtime
