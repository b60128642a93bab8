#include "hgm/policy/policy.hpp"

#include <cmath>
#include <vector>

#include "hgm/errors.hpp"

namespace hgm::policy {

using bandit::BetaParams;
using bandit::Candidate;
using bandit::Tau;

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::HGM:
      return "hgm";
    case PolicyKind::Greedy:
      return "greedy";
    case PolicyKind::DGMLike:
      return "dgm_like";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  if (name == "hgm") return PolicyKind::HGM;
  if (name == "greedy" || name == "sica_like") return PolicyKind::Greedy;
  if (name == "dgm_like" || name == "dgm") return PolicyKind::DGMLike;
  throw ParameterError("unknown policy kind '" + std::string(name) + "'");
}

void PolicyConfig::validate() const {
  if (!(alpha_widening >= 0.0 && alpha_widening <= 1.0)) {
    throw ParameterError("policy.alpha_widening must lie in [0, 1]");
  }
  if (!(epsilon_percentile > 0.0 && epsilon_percentile <= 100.0)) {
    throw ParameterError("policy.epsilon_percentile must lie in (0, 100]");
  }
  if (scheduler == SchedulerKind::Constant && !(constant_tau > 0.0 && std::isfinite(constant_tau))) {
    throw ParameterError("policy.constant_tau must be positive");
  }
  if (dgm_stage_size == 0) throw ParameterError("policy.dgm_stage_size must be positive");
  if (!(dgm_stage_threshold >= 0.0 && dgm_stage_threshold <= 1.0)) {
    throw ParameterError("policy.dgm_stage_threshold must lie in [0, 1]");
  }
}

bool widening_allows_expansion(std::uint64_t n, double alpha, std::size_t size) {
  const double lhs = std::pow(static_cast<double>(n), alpha);
  return lhs >= static_cast<double>(size) * (1.0 - 1e-12);
}

ActionKind decide_action_kind(const BudgetState& budget, std::size_t tree_size_effective,
                              const PolicyConfig& cfg) {
  const std::uint64_t n = budget.committed_evals + budget.inflight_evals;
  return widening_allows_expansion(n, cfg.alpha_widening, tree_size_effective) ? ActionKind::Expand
                                                                              : ActionKind::Evaluate;
}

Tau tau_for(const BudgetState& budget, const PolicyConfig& cfg) {
  if (cfg.scheduler == SchedulerKind::Constant) return Tau(cfg.constant_tau);
  if (budget.committed_evals >= budget.total_budget) {
    throw UsageError("tau_for: budget already exhausted");
  }
  return bandit::scheduler_tau(budget.total_budget, budget.total_budget - budget.committed_evals);
}

AgentId select_expansion_parent(const SearchTree& tree, Tau tau, RandomStream& rng) {
  std::vector<Candidate> candidates;
  candidates.reserve(tree.size());
  const double t = tau.value();
  for (const AgentNode& n : tree.nodes()) {
    candidates.push_back({n.id.index, BetaParams(t * (1.0 + static_cast<double>(n.clade_success)),
                                                 t * (1.0 + static_cast<double>(n.clade_failure)))});
  }
  return AgentId{static_cast<std::size_t>(bandit::thompson_select(candidates, rng))};
}

std::optional<AgentId> select_evaluation_agent(const SearchTree& tree, Tau tau, RandomStream& rng) {
  std::vector<Candidate> candidates;
  const double t = tau.value();
  for (const AgentNode& n : tree.nodes()) {
    if (n.remaining_tasks.empty()) continue;
    candidates.push_back({n.id.index, BetaParams(t * (1.0 + static_cast<double>(n.n_success)),
                                                 t * (1.0 + static_cast<double>(n.n_failure)))});
  }
  if (candidates.empty()) return std::nullopt;
  return AgentId{static_cast<std::size_t>(bandit::thompson_select(candidates, rng))};
}

TaskId select_task(const AgentNode& node, RandomStream& rng) {
  if (node.remaining_tasks.empty()) {
    throw UsageError("select_task: agent " + std::to_string(node.id.index) + " has no remaining tasks");
  }
  return node.remaining_tasks[rng.index_below(node.remaining_tasks.size())];
}

double best_belief_score(const AgentNode& node, double epsilon_percentile) {
  if (!(epsilon_percentile > 0.0 && epsilon_percentile <= 100.0)) {
    throw ParameterError("epsilon_percentile must lie in (0, 100]");
  }
  if (epsilon_percentile == 100.0) return 1.0;
  const BetaParams posterior(1.0 + static_cast<double>(node.n_success),
                             1.0 + static_cast<double>(node.n_failure));
  return bandit::beta_quantile(epsilon_percentile / 100.0, posterior);
}

AgentId argmax_with_ties(const SearchTree& tree, const std::function<double(const AgentNode&)>& score) {
  const AgentNode* best = nullptr;
  double best_score = 0.0;
  for (const AgentNode& n : tree.nodes()) {
    const double s = score(n);
    if (best == nullptr || s > best_score ||
        (s == best_score && n.evaluations() > best->evaluations())) {
      best = &n;
      best_score = s;
    }
  }
  return best->id;
}

AgentId best_belief_agent(const SearchTree& tree, double epsilon_percentile) {
  return argmax_with_ties(tree, [epsilon_percentile](const AgentNode& n) {
    return best_belief_score(n, epsilon_percentile);
  });
}

// ---- baselines --------------------------------------------------------------

std::optional<Action> greedy_policy_step(const SearchTree& tree, const PhaseState& state,
                                         RandomStream& rng) {
  if (state.expansion_in_flight) return std::nullopt;
  if (state.current_child) {
    const AgentNode& child = tree.node(*state.current_child);
    if (!child.remaining_tasks.empty()) return Action::evaluate(child.id, select_task(child, rng));
    if (child.pending_evals > 0) return std::nullopt;
  }
  const AgentNode* best = nullptr;
  for (const AgentNode& n : tree.nodes()) {
    if (n.evaluations() != tree.task_count()) continue;
    // >= so that later (newer) nodes win ties
    if (best == nullptr || *n.empirical_mean() >= *best->empirical_mean()) best = &n;
  }
  return Action::expand(best ? best->id : tree.root());
}

double dgm_parent_weight(const AgentNode& node) {
  const double smoothed = (static_cast<double>(node.n_success) + 1.0) /
                          (static_cast<double>(node.evaluations()) + 2.0);
  return smoothed / (1.0 + static_cast<double>(node.children.size()));
}

std::optional<Action> dgm_like_policy_step(const SearchTree& tree, PhaseState& state,
                                           const PolicyConfig& cfg, RandomStream& rng) {
  if (state.expansion_in_flight) return std::nullopt;
  if (state.current_child) {
    const AgentNode& child = tree.node(*state.current_child);
    const std::uint64_t stage = std::min<std::uint64_t>(cfg.dgm_stage_size, tree.task_count());
    const std::uint64_t allocated = child.evaluations() + child.pending_evals;
    if (allocated < stage) return Action::evaluate(child.id, select_task(child, rng));
    if (!state.stage_passed) {
      if (child.evaluations() < stage) return std::nullopt;
      const double accuracy = static_cast<double>(child.n_success) / static_cast<double>(child.evaluations());
      state.stage_passed = accuracy >= cfg.dgm_stage_threshold;
    }
    if (*state.stage_passed) {
      if (!child.remaining_tasks.empty()) return Action::evaluate(child.id, select_task(child, rng));
      if (child.pending_evals > 0) return std::nullopt;
    } else if (child.pending_evals > 0) {
      return std::nullopt;
    }
  }
  double total = 0.0;
  for (const AgentNode& n : tree.nodes()) total += dgm_parent_weight(n);
  const double target = rng.uniform_open() * total;
  double running = 0.0;
  for (const AgentNode& n : tree.nodes()) {
    running += dgm_parent_weight(n);
    if (target < running) return Action::expand(n.id);
  }
  return Action::expand(tree.nodes().back().id);
}

// ---- policy objects ---------------------------------------------------------

namespace {

class HgmPolicy final : public SearchPolicy {
 public:
  HgmPolicy(const PolicyConfig& cfg, std::size_t init_expansions)
      : cfg_(cfg), init_target_(init_expansions) {}

  PolicyKind kind() const override { return PolicyKind::HGM; }

  std::optional<PlannedAction> next_action(const SearchTree& tree, const BudgetState& budget,
                                           RandomStream& rng) override {
    const double tau = tau_for(budget, cfg_).value();
    if (init_committed_ < init_target_) {
      if (init_dispatched_ < init_target_) {
        ++init_dispatched_;
        return PlannedAction{Action::expand(tree.root()), "init", tau};
      }
      return std::nullopt;
    }
    const std::size_t effective = tree.size() + tree.pending_expansions_total();
    const Tau t(tau);
    if (decide_action_kind(budget, effective, cfg_) == ActionKind::Expand) {
      return PlannedAction{Action::expand(select_expansion_parent(tree, t, rng)), "widen", tau};
    }
    if (auto agent = select_evaluation_agent(tree, t, rng)) {
      return PlannedAction{Action::evaluate(*agent, select_task(tree.node(*agent), rng)), "evaluate", tau};
    }
    return PlannedAction{Action::expand(select_expansion_parent(tree, t, rng)), "starved", tau};
  }

  void on_expansion_committed(AgentId, AgentId) override {
    if (init_committed_ < init_dispatched_) ++init_committed_;
  }

  void on_expansion_dropped(AgentId) override {
    if (init_committed_ < init_dispatched_) --init_dispatched_;
  }

 private:
  PolicyConfig cfg_;
  std::size_t init_target_;
  std::size_t init_dispatched_ = 0;
  std::size_t init_committed_ = 0;
};

class PhasedPolicy final : public SearchPolicy {
 public:
  PhasedPolicy(PolicyKind kind, const PolicyConfig& cfg) : kind_(kind), cfg_(cfg) {}

  PolicyKind kind() const override { return kind_; }

  std::optional<PlannedAction> next_action(const SearchTree& tree, const BudgetState&,
                                           RandomStream& rng) override {
    std::optional<Action> action = kind_ == PolicyKind::Greedy
                                       ? greedy_policy_step(tree, state_, rng)
                                       : dgm_like_policy_step(tree, state_, cfg_, rng);
    if (!action) return std::nullopt;
    if (action->kind == ActionKind::Expand) state_.expansion_in_flight = true;
    return PlannedAction{*action, action->kind == ActionKind::Expand ? "phase_expand" : "phase_evaluate", 1.0};
  }

  void on_expansion_committed(AgentId, AgentId child) override {
    state_.expansion_in_flight = false;
    state_.current_child = child;
    state_.stage_passed.reset();
  }

  void on_expansion_dropped(AgentId) override { state_.expansion_in_flight = false; }

 private:
  PolicyKind kind_;
  PolicyConfig cfg_;
  PhaseState state_;
};

}  // namespace

std::unique_ptr<SearchPolicy> make_policy(PolicyKind kind, const PolicyConfig& cfg,
                                          std::size_t init_expansions) {
  cfg.validate();
  if (kind == PolicyKind::HGM) return std::make_unique<HgmPolicy>(cfg, init_expansions);
  return std::make_unique<PhasedPolicy>(kind, cfg);
}

}  // namespace hgm::policy
