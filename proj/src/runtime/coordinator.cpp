#include "hgm/runtime/coordinator.hpp"

#include "hgm/errors.hpp"

namespace hgm::runtime {

using policy::Action;
using policy::ActionKind;

Coordinator::Coordinator(const RunConfig& cfg, EventLog& log, env::AgentHandle root_handle)
    : Coordinator(cfg, log, SearchTree(cfg.env.task_count), {root_handle}, 0) {}

Coordinator::Coordinator(const RunConfig& cfg, EventLog& log, SearchTree tree,
                         std::vector<env::AgentHandle> handles, std::uint64_t first_action_seq)
    : cfg_(cfg),
      log_(log),
      tree_(std::move(tree)),
      handles_(std::move(handles)),
      policy_(policy::make_policy(cfg.policy_kind, cfg.policy,
                                  first_action_seq == 0 && tree_.size() == 1 ? cfg.init_expansions : 0)),
      next_action_(first_action_seq) {
  cfg_.validate();
  if (handles_.size() != tree_.size()) throw UsageError("Coordinator: one handle per node required");
  if (tree_.pending_evals_total() != 0 || tree_.pending_expansions_total() != 0) {
    throw UsageError("Coordinator: starting tree must have no in-flight work");
  }
  if (tree_.task_count() != cfg_.env.task_count) throw UsageError("Coordinator: task count mismatch");
}

void Coordinator::log_run_start() {
  if (!log_.recording()) return;
  Json payload;
  payload["schema"] = kEventSchemaVersion;
  payload["config"] = to_json(cfg_);
  log_.append(EventKind::RunStart, logical_time_, std::move(payload));
}

policy::BudgetState Coordinator::budget() const {
  return {cfg_.budget_B, tree_.total_evaluations(), tree_.pending_evals_total(),
          tree_.pending_expansions_total()};
}

std::optional<Dispatch> Coordinator::next_dispatch() {
  const policy::BudgetState b = budget();
  if (b.exhausted()) return std::nullopt;
  const std::uint64_t seq = next_action_;
  RandomStream rng = RandomStream::keyed(cfg_.seed, StreamDomain::Decision, seq);
  std::optional<policy::PlannedAction> planned = policy_->next_action(tree_, b, rng);
  if (!planned) return std::nullopt;
  ++next_action_;
  const Action& action = planned->action;

  if (log_.recording()) {
    Json d;
    d["action"] = seq;
    d["decision"] = action.kind == ActionKind::Expand ? "expand" : "evaluate";
    d["agent"] = action.agent.index;
    d["task"] = action.task ? Json(action.task->index) : Json(nullptr);
    d["reason"] = planned->reason;
    d["tau"] = planned->tau;
    d["committed"] = b.committed_evals;
    d["inflight_evals"] = b.inflight_evals;
    d["inflight_expansions"] = b.inflight_expansions;
    d["tree_size"] = tree_.size();
    log_.append(EventKind::Decision, logical_time_, std::move(d));
  }

  if (action.kind == ActionKind::Expand) {
    tree_.begin_expansion(action.agent);
    if (log_.recording()) {
      Json s;
      s["action"] = seq;
      s["parent"] = action.agent.index;
      log_.append(EventKind::ExpandStart, logical_time_, std::move(s));
    }
  } else {
    tree_.reserve_task(action.agent, *action.task);
    if (log_.recording()) {
      Json s;
      s["action"] = seq;
      s["agent"] = action.agent.index;
      s["task"] = action.task->index;
      log_.append(EventKind::EvalStart, logical_time_, std::move(s));
    }
  }
  inflight_.emplace(seq, action);
  return Dispatch{seq, action, handles_[action.agent.index]};
}

void Coordinator::undo(const Action& action) {
  if (action.kind == ActionKind::Expand) {
    tree_.abort_expansion(action.agent);
    policy_->on_expansion_dropped(action.agent);
  } else {
    tree_.release_task(action.agent, *action.task);
  }
}

void Coordinator::complete(const Completion& c) {
  auto it = inflight_.find(c.action_seq);
  if (it == inflight_.end()) throw UsageError("completion for unknown action " + std::to_string(c.action_seq));
  const Action action = it->second;
  inflight_.erase(it);
  ++logical_time_;

  if (c.failed) {
    undo(action);
    if (log_.recording()) {
      Json f;
      f["action"] = c.action_seq;
      f["reason"] = "executor failure";
      log_.append(EventKind::ActionFailed, logical_time_, std::move(f));
    }
    return;
  }

  if (action.kind == ActionKind::Expand) {
    const AgentId child = tree_.finish_expansion(action.agent);
    handles_.push_back(c.child);
    policy_->on_expansion_committed(action.agent, child);
    if (log_.recording()) {
      Json e;
      e["action"] = c.action_seq;
      e["parent"] = action.agent.index;
      e["child"] = child.index;
      log_.append(EventKind::ExpandCommit, logical_time_, std::move(e));
    }
    return;
  }

  tree_.record_evaluation(action.agent, *action.task, c.success);
  if (log_.recording()) {
    const AgentNode& n = tree_.node(action.agent);
    Json e;
    e["action"] = c.action_seq;
    e["agent"] = action.agent.index;
    e["task"] = action.task->index;
    e["success"] = c.success;
    e["n_success"] = n.n_success;
    e["n_failure"] = n.n_failure;
    e["clade_success"] = n.clade_success;
    e["clade_failure"] = n.clade_failure;
    e["committed"] = tree_.total_evaluations();
    log_.append(EventKind::EvalCommit, logical_time_, std::move(e));
  }
}

void Coordinator::discard_inflight() {
  for (const auto& [seq, action] : inflight_) {
    undo(action);
    ++logical_time_;
    if (log_.recording()) {
      Json d;
      d["action"] = seq;
      d["decision"] = action.kind == ActionKind::Expand ? "expand" : "evaluate";
      log_.append(EventKind::ActionDiscarded, logical_time_, std::move(d));
    }
  }
  inflight_.clear();
}

void Coordinator::mark_starved() {
  if (!log_.recording()) return;
  Json s;
  s["committed"] = tree_.total_evaluations();
  s["tree_size"] = tree_.size();
  log_.append(EventKind::Starved, logical_time_, std::move(s));
}

AgentId Coordinator::finalize() {
  const AgentId best = policy::best_belief_agent(tree_, cfg_.policy.epsilon_percentile);
  if (log_.recording()) {
    const AgentNode& n = tree_.node(best);
    Json f;
    f["agent"] = best.index;
    f["score"] = policy::best_belief_score(n, cfg_.policy.epsilon_percentile);
    f["n_success"] = n.n_success;
    f["n_failure"] = n.n_failure;
    f["tree_size"] = tree_.size();
    f["committed"] = tree_.total_evaluations();
    log_.append(EventKind::FinalSelection, logical_time_, std::move(f));
  }
  return best;
}

std::optional<Action> Coordinator::inflight_action(std::uint64_t action_seq) const {
  auto it = inflight_.find(action_seq);
  if (it == inflight_.end()) return std::nullopt;
  return it->second;
}

}  // namespace hgm::runtime
