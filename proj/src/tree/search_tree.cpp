#include "hgm/tree/search_tree.hpp"

#include <algorithm>
#include <string>

#include "hgm/errors.hpp"

namespace hgm {

namespace {

std::string describe(AgentId id) { return "agent " + std::to_string(id.index); }

}  // namespace

std::optional<double> AgentNode::empirical_mean() const {
  const std::uint64_t n = evaluations();
  if (n == 0) return std::nullopt;
  return static_cast<double>(n_success) / static_cast<double>(n);
}

SearchTree::SearchTree(std::size_t task_count) : task_count_(task_count) {
  if (task_count == 0) throw ParameterError("SearchTree: task_count must be at least 1");
  nodes_.push_back(make_node(AgentId{0}, std::nullopt));
}

AgentNode SearchTree::make_node(AgentId id, std::optional<AgentId> parent) const {
  AgentNode n;
  n.id = id;
  n.parent = parent;
  n.remaining_tasks.reserve(task_count_);
  for (std::size_t t = 0; t < task_count_; ++t) n.remaining_tasks.push_back(TaskId{t});
  n.task_states.assign(task_count_, TaskState::Remaining);
  return n;
}

const AgentNode& SearchTree::node(AgentId id) const {
  if (!contains(id)) throw UsageError("unknown " + describe(id));
  return nodes_[id.index];
}

AgentNode& SearchTree::mutable_node(AgentId id) {
  if (!contains(id)) throw UsageError("unknown " + describe(id));
  return nodes_[id.index];
}

AgentId SearchTree::add_child(AgentId parent) {
  mutable_node(parent);
  const AgentId child{nodes_.size()};
  nodes_.push_back(make_node(child, parent));
  nodes_[parent.index].children.push_back(child);
  return child;
}

void SearchTree::begin_expansion(AgentId parent) {
  ++mutable_node(parent).pending_expansions;
  ++pending_expansions_total_;
}

AgentId SearchTree::finish_expansion(AgentId parent) {
  AgentNode& p = mutable_node(parent);
  if (p.pending_expansions == 0) throw UsageError("no pending expansion on " + describe(parent));
  --p.pending_expansions;
  --pending_expansions_total_;
  return add_child(parent);
}

void SearchTree::abort_expansion(AgentId parent) {
  AgentNode& p = mutable_node(parent);
  if (p.pending_expansions == 0) throw UsageError("no pending expansion on " + describe(parent));
  --p.pending_expansions;
  --pending_expansions_total_;
}

void SearchTree::remove_remaining(AgentNode& n, TaskId task) {
  auto it = std::find(n.remaining_tasks.begin(), n.remaining_tasks.end(), task);
  n.remaining_tasks.erase(it);
}

void SearchTree::reserve_task(AgentId agent, TaskId task) {
  AgentNode& n = mutable_node(agent);
  if (task.index >= task_count_) throw UsageError("unknown task " + std::to_string(task.index));
  if (n.task_states[task.index] != TaskState::Remaining) {
    throw UsageError("task " + std::to_string(task.index) + " is not remaining on " + describe(agent));
  }
  remove_remaining(n, task);
  n.task_states[task.index] = TaskState::Pending;
  ++n.pending_evals;
  ++pending_evals_total_;
}

void SearchTree::release_task(AgentId agent, TaskId task) {
  AgentNode& n = mutable_node(agent);
  if (task.index >= task_count_ || n.task_states[task.index] != TaskState::Pending) {
    throw UsageError("task " + std::to_string(task.index) + " is not pending on " + describe(agent));
  }
  n.task_states[task.index] = TaskState::Remaining;
  n.remaining_tasks.push_back(task);
  --n.pending_evals;
  --pending_evals_total_;
}

void SearchTree::record_evaluation(AgentId agent, TaskId task, bool success) {
  AgentNode& n = mutable_node(agent);
  if (task.index >= task_count_) throw UsageError("unknown task " + std::to_string(task.index));
  const TaskState state = n.task_states[task.index];
  if (state == TaskState::Succeeded || state == TaskState::Failed) {
    throw UsageError("task " + std::to_string(task.index) + " already evaluated on " + describe(agent));
  }
  if (state == TaskState::Remaining) {
    remove_remaining(n, task);
  } else {
    --n.pending_evals;
    --pending_evals_total_;
  }
  n.task_states[task.index] = success ? TaskState::Succeeded : TaskState::Failed;
  if (success) {
    ++n.n_success;
  } else {
    ++n.n_failure;
  }
  ++total_evaluations_;

  std::optional<AgentId> cursor = agent;
  while (cursor) {
    AgentNode& a = nodes_[cursor->index];
    if (success) {
      ++a.clade_success;
    } else {
      ++a.clade_failure;
    }
    cursor = a.parent;
  }
}

std::optional<double> SearchTree::cmp_estimate(AgentId agent) const {
  const AgentNode& n = node(agent);
  const std::uint64_t total = n.clade_evaluations();
  if (total == 0) return std::nullopt;
  return static_cast<double>(n.clade_success) / static_cast<double>(total);
}

std::vector<AgentId> SearchTree::clade_members(AgentId agent) const {
  node(agent);
  std::vector<AgentId> out;
  std::vector<AgentId> stack{agent};
  while (!stack.empty()) {
    const AgentId current = stack.back();
    stack.pop_back();
    out.push_back(current);
    const auto& kids = nodes_[current.index].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool SearchTree::in_clade(AgentId ancestor, AgentId n) const {
  node(ancestor);
  std::optional<AgentId> cursor = node(n).id;
  while (cursor) {
    if (*cursor == ancestor) return true;
    cursor = nodes_[cursor->index].parent;
  }
  return false;
}

SearchTree SearchTree::from_nodes(std::size_t task_count, std::vector<AgentNode> nodes) {
  SearchTree tree(task_count);
  if (nodes.empty()) throw ParameterError("snapshot has no nodes");
  tree.nodes_ = std::move(nodes);
  tree.total_evaluations_ = 0;
  tree.pending_evals_total_ = 0;
  tree.pending_expansions_total_ = 0;
  for (const AgentNode& n : tree.nodes_) {
    tree.total_evaluations_ += n.evaluations();
    tree.pending_evals_total_ += n.pending_evals;
    tree.pending_expansions_total_ += n.pending_expansions;
  }
  tree.check_invariants();
  return tree;
}

void SearchTree::check_invariants() const {
  auto fail = [](const std::string& what) { throw UsageError("tree invariant: " + what); };
  if (nodes_.empty() || nodes_[0].parent) fail("root must exist and have no parent");
  std::vector<std::uint64_t> sub_s(nodes_.size(), 0);
  std::vector<std::uint64_t> sub_f(nodes_.size(), 0);
  std::vector<std::size_t> child_refs(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const AgentNode& n = nodes_[i];
    if (n.id.index != i) fail("ids must be dense and ordered");
    if (i > 0) {
      if (!n.parent || n.parent->index >= i) fail(describe(n.id) + " parent must precede it");
    }
    for (AgentId c : n.children) {
      if (c.index >= nodes_.size() || nodes_[c.index].parent != n.id) fail("child link mismatch");
      ++child_refs[c.index];
    }
    if (n.task_states.size() != task_count_) fail("task state table size");
    std::uint64_t s = 0, f = 0, p = 0, r = 0;
    for (TaskState st : n.task_states) {
      s += st == TaskState::Succeeded;
      f += st == TaskState::Failed;
      p += st == TaskState::Pending;
      r += st == TaskState::Remaining;
    }
    if (s != n.n_success || f != n.n_failure || p != n.pending_evals || r != n.remaining_tasks.size()) {
      fail(describe(n.id) + " task accounting");
    }
    for (TaskId t : n.remaining_tasks) {
      if (t.index >= task_count_ || n.task_states[t.index] != TaskState::Remaining) {
        fail(describe(n.id) + " remaining pool");
      }
    }
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (child_refs[i] != 1) fail(describe(AgentId{i}) + " must be listed by exactly one parent");
  }
  // Parents precede children, so a reverse sweep accumulates subtree sums.
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    sub_s[i] += nodes_[i].n_success;
    sub_f[i] += nodes_[i].n_failure;
    if (sub_s[i] != nodes_[i].clade_success || sub_f[i] != nodes_[i].clade_failure) {
      fail(describe(AgentId{i}) + " clade counters");
    }
    if (nodes_[i].parent) {
      sub_s[nodes_[i].parent->index] += sub_s[i];
      sub_f[nodes_[i].parent->index] += sub_f[i];
    }
  }
}

}  // namespace hgm
