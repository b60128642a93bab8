#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hgm {

// Dense creation-order index of a node; the root is 0.
struct AgentId {
  std::size_t index = 0;
  friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

// Index into the fixed task list shared by every agent.
struct TaskId {
  std::size_t index = 0;
  friend auto operator<=>(const TaskId&, const TaskId&) = default;
};

enum class TaskState : std::uint8_t { Remaining, Pending, Succeeded, Failed };

struct AgentNode {
  AgentId id;
  std::optional<AgentId> parent;
  std::vector<AgentId> children;
  std::uint64_t n_success = 0;
  std::uint64_t n_failure = 0;
  std::uint64_t clade_success = 0;
  std::uint64_t clade_failure = 0;
  std::uint64_t pending_evals = 0;
  std::uint64_t pending_expansions = 0;
  // Unassigned tasks, in a deterministic order (new releases go to the back).
  std::vector<TaskId> remaining_tasks;
  std::vector<TaskState> task_states;

  std::uint64_t evaluations() const noexcept { return n_success + n_failure; }
  std::uint64_t clade_evaluations() const noexcept { return clade_success + clade_failure; }
  std::optional<double> empirical_mean() const;
};

// The archive of agents: a rooted tree whose clade counters are kept current
// by an ancestor walk on every committed evaluation.
class SearchTree {
 public:
  explicit SearchTree(std::size_t task_count);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t task_count() const noexcept { return task_count_; }
  AgentId root() const noexcept { return AgentId{0}; }
  bool contains(AgentId id) const noexcept { return id.index < nodes_.size(); }

  const AgentNode& node(AgentId id) const;
  std::span<const AgentNode> nodes() const noexcept { return nodes_; }

  AgentId add_child(AgentId parent);

  // In-flight expansion bookkeeping; finish_expansion appends the child.
  void begin_expansion(AgentId parent);
  AgentId finish_expansion(AgentId parent);
  void abort_expansion(AgentId parent);

  // Moves a task from the agent's remaining pool to its pending set.
  void reserve_task(AgentId agent, TaskId task);
  // Returns a pending task to the back of the remaining pool.
  void release_task(AgentId agent, TaskId task);

  // Commits one outcome. The task must be remaining or pending on the agent;
  // each (agent, task) pair can be committed at most once.
  void record_evaluation(AgentId agent, TaskId task, bool success);

  // Clade successes over clade evaluations; empty when the clade is unevaluated.
  std::optional<double> cmp_estimate(AgentId agent) const;

  // The subtree rooted at `agent`, in preorder.
  std::vector<AgentId> clade_members(AgentId agent) const;
  bool in_clade(AgentId ancestor, AgentId node) const;

  std::uint64_t total_evaluations() const noexcept { return total_evaluations_; }
  std::uint64_t pending_evals_total() const noexcept { return pending_evals_total_; }
  std::uint64_t pending_expansions_total() const noexcept { return pending_expansions_total_; }

  // Rebuilds a tree from explicit node records (snapshot loading); validates
  // every structural and counting invariant.
  static SearchTree from_nodes(std::size_t task_count, std::vector<AgentNode> nodes);

  // Throws UsageError describing the first broken invariant.
  void check_invariants() const;

 private:
  AgentNode& mutable_node(AgentId id);
  AgentNode make_node(AgentId id, std::optional<AgentId> parent) const;
  void remove_remaining(AgentNode& node, TaskId task);

  std::size_t task_count_;
  std::vector<AgentNode> nodes_;
  std::uint64_t total_evaluations_ = 0;
  std::uint64_t pending_evals_total_ = 0;
  std::uint64_t pending_expansions_total_ = 0;
};

}  // namespace hgm
