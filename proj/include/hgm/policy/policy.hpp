#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "hgm/bandit/thompson.hpp"
#include "hgm/random.hpp"
#include "hgm/tree/search_tree.hpp"

namespace hgm::policy {

enum class SchedulerKind { BOverB, Constant };
enum class PolicyKind { HGM, Greedy, DGMLike };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

struct PolicyConfig {
  double alpha_widening = 0.6;
  double epsilon_percentile = 1.0;
  SchedulerKind scheduler = SchedulerKind::BOverB;
  double constant_tau = 1.0;
  // DGM-like baseline staging.
  std::size_t dgm_stage_size = 10;
  double dgm_stage_threshold = 0.4;

  void validate() const;
};

enum class ActionKind { Expand, Evaluate };

// Expand(agent) or Evaluate(agent, task).
struct Action {
  ActionKind kind = ActionKind::Expand;
  AgentId agent;
  std::optional<TaskId> task;

  static Action expand(AgentId parent) { return {ActionKind::Expand, parent, std::nullopt}; }
  static Action evaluate(AgentId agent, TaskId task) { return {ActionKind::Evaluate, agent, task}; }
  friend bool operator==(const Action&, const Action&) = default;
};

struct BudgetState {
  std::uint64_t total_budget = 0;
  std::uint64_t committed_evals = 0;
  std::uint64_t inflight_evals = 0;
  std::uint64_t inflight_expansions = 0;

  std::uint64_t allocated() const noexcept { return committed_evals + inflight_evals; }
  bool exhausted() const noexcept { return allocated() >= total_budget; }
};

// Widening rule: expand iff n^alpha >= size. A relative slack of 1e-12 absorbs
// pow() rounding so exact cases such as 32^0.6 = 8 resolve to Expand.
bool widening_allows_expansion(std::uint64_t n, double alpha, std::size_t size);

// N = committed + in-flight evaluations; effective size counts in-flight expansions.
ActionKind decide_action_kind(const BudgetState& budget, std::size_t tree_size_effective,
                              const PolicyConfig& cfg);

// tau = B / (B - committed) under BOverB; in-flight evaluations do not shrink b.
bandit::Tau tau_for(const BudgetState& budget, const PolicyConfig& cfg);

// Thompson draw over every node using clade counters: Beta(tau(1+S^C), tau(1+F^C)).
AgentId select_expansion_parent(const SearchTree& tree, bandit::Tau tau, RandomStream& rng);

// Thompson draw over nodes with unassigned tasks using node counters.
// Empty when no node is eligible ("evaluation starved").
std::optional<AgentId> select_evaluation_agent(const SearchTree& tree, bandit::Tau tau,
                                               RandomStream& rng);

// Uniform pick from the node's unassigned tasks (one rng word).
TaskId select_task(const AgentNode& node, RandomStream& rng);

// Lower epsilon/100 quantile of Beta(1 + successes, 1 + failures).
double best_belief_score(const AgentNode& node, double epsilon_percentile);

// Argmax of `score`; ties go to more evaluations, then to the smaller id.
AgentId argmax_with_ties(const SearchTree& tree, const std::function<double(const AgentNode&)>& score);

AgentId best_belief_agent(const SearchTree& tree, double epsilon_percentile);

// A decision plus the facts needed to audit it later.
struct PlannedAction {
  Action action;
  std::string reason;
  double tau = 1.0;
};

// Stateful decision maker driven by the runtime coordinator. next_action is
// called only when the coordinator is ready to dispatch; an empty result means
// "wait for an in-flight action to finish".
class SearchPolicy {
 public:
  virtual ~SearchPolicy() = default;
  virtual PolicyKind kind() const = 0;
  virtual std::optional<PlannedAction> next_action(const SearchTree& tree, const BudgetState& budget,
                                                   RandomStream& rng) = 0;
  virtual void on_expansion_committed(AgentId /*parent*/, AgentId /*child*/) {}
  virtual void on_expansion_dropped(AgentId /*parent*/) {}
};

// init_expansions root expansions are issued first and must all commit before
// any other decision is made.
std::unique_ptr<SearchPolicy> make_policy(PolicyKind kind, const PolicyConfig& cfg,
                                          std::size_t init_expansions);

// ---- comparison baselines -------------------------------------------------

struct PhaseState {
  std::optional<AgentId> current_child;
  bool expansion_in_flight = false;
  // DGM-like only: verdict of the first evaluation stage of current_child.
  std::optional<bool> stage_passed;
};

// SICA-like: expand the best fully evaluated agent (ties: newest), then evaluate
// the new child on every task before expanding again.
std::optional<Action> greedy_policy_step(const SearchTree& tree, const PhaseState& state,
                                         RandomStream& rng);

// Parent weight for the DGM-like baseline: Laplace-smoothed mean / (1 + children).
double dgm_parent_weight(const AgentNode& node);

// DGM-like: sample a parent by dgm_parent_weight, evaluate the child on a first
// stage of tasks, and continue to the full set only if the stage accuracy
// reaches the threshold.
std::optional<Action> dgm_like_policy_step(const SearchTree& tree, PhaseState& state,
                                           const PolicyConfig& cfg, RandomStream& rng);

}  // namespace hgm::policy
