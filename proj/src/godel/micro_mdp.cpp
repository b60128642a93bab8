#include "hgm/godel/micro_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <tuple>

#include "hgm/errors.hpp"

namespace hgm::godel {

void MicroMDP::validate() const {
  const std::size_t k = types();
  if (k == 0 || k > 5) throw ParameterError("micro MDP needs between 1 and 5 agent types");
  if (transition.size() != k) throw ParameterError("transition must have one row per agent type");
  if (budget > 4) throw ParameterError("micro MDP budget must be at most 4");
  if (root_type >= k) throw ParameterError("root_type out of range");
  for (double u : utilities) {
    if (!(u >= 0.0 && u <= 1.0)) throw ParameterError("utilities must lie in [0,1]");
  }
  for (const auto& row : transition) {
    if (row.size() != k) throw ParameterError("transition rows must have one entry per agent type");
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("transition probabilities must lie in [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("transition rows must sum to 1");
  }
}

const char* to_string(GodelAction action) {
  return action == GodelAction::KeepParent ? "KeepParent" : "AcceptChild";
}

GodelState initial_state(const MicroMDP& mdp) {
  return {mdp.root_type, mdp.root_type, mdp.budget};
}

namespace {

std::size_t acted_type(const GodelState& s, GodelAction a) {
  return a == GodelAction::KeepParent ? s.parent_type : s.child_type;
}

void check_state(const MicroMDP& mdp, const GodelState& s) {
  if (s.parent_type >= mdp.types() || s.child_type >= mdp.types()) {
    throw ParameterError("state references an unknown agent type");
  }
}

double terminal_value(const MicroMDP& mdp, const GodelState& s) {
  return std::max(mdp.utilities[s.parent_type], mdp.utilities[s.child_type]);
}

// Memoized backward induction over (parent, child, budget).
class ValueTable {
 public:
  explicit ValueTable(const MicroMDP& mdp) : mdp_(mdp) {}

  double value(const GodelState& s) {
    if (s.remaining_budget == 0) return terminal_value(mdp_, s);
    const auto key = std::make_tuple(s.parent_type, s.child_type, s.remaining_budget);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const double v = std::max(q(s, GodelAction::KeepParent), q(s, GodelAction::AcceptChild));
    memo_.emplace(key, v);
    return v;
  }

  double q(const GodelState& s, GodelAction a) {
    if (s.remaining_budget == 0) return terminal_value(mdp_, s);
    const std::size_t x = acted_type(s, a);
    double total = 0.0;
    for (std::size_t k = 0; k < mdp_.types(); ++k) {
      const double p = mdp_.transition[x][k];
      if (p == 0.0) continue;
      total += p * value({x, k, s.remaining_budget - 1});
    }
    return total;
  }

 private:
  const MicroMDP& mdp_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> memo_;
};

}  // namespace

std::vector<GodelState> reachable_states(const MicroMDP& mdp) {
  std::vector<GodelState> order;
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  std::deque<GodelState> queue{initial_state(mdp)};
  while (!queue.empty()) {
    const GodelState s = queue.front();
    queue.pop_front();
    if (!seen.emplace(s.parent_type, s.child_type, s.remaining_budget).second) continue;
    order.push_back(s);
    if (s.remaining_budget == 0) continue;
    for (GodelAction a : {GodelAction::KeepParent, GodelAction::AcceptChild}) {
      const std::size_t x = acted_type(s, a);
      for (std::size_t k = 0; k < mdp.types(); ++k) {
        if (mdp.transition[x][k] > 0.0) queue.push_back({x, k, s.remaining_budget - 1});
      }
    }
  }
  return order;
}

double q_value(const MicroMDP& mdp, const GodelState& state, GodelAction action) {
  check_state(mdp, state);
  ValueTable table(mdp);
  return table.q(state, action);
}

double state_value(const MicroMDP& mdp, const GodelState& state) {
  check_state(mdp, state);
  ValueTable table(mdp);
  return table.value(state);
}

GodelAction dp_optimal_action(const MicroMDP& mdp, const GodelState& state) {
  check_state(mdp, state);
  ValueTable table(mdp);
  const double keep = table.q(state, GodelAction::KeepParent);
  const double accept = table.q(state, GodelAction::AcceptChild);
  return accept > keep + kTieTolerance ? GodelAction::AcceptChild : GodelAction::KeepParent;
}

namespace {

struct AgentTree {
  std::vector<std::size_t> type;
  std::vector<std::size_t> parent;  // parent of root is itself

  std::size_t add(std::size_t t, std::size_t p) {
    type.push_back(t);
    parent.push_back(type.size() == 1 ? 0 : p);
    return type.size() - 1;
  }
  bool in_clade(std::size_t node, std::size_t head) const {
    while (true) {
      if (node == head) return true;
      if (node == 0) return false;
      node = parent[node];
    }
  }
};

class Enumerator {
 public:
  Enumerator(const MicroMDP& mdp, const ChainPolicy& policy, ScoreRule rule)
      : mdp_(mdp), policy_(policy), rule_(rule) {}

  Enumeration run(const GodelState& s, GodelAction action) {
    // The observed parent is the root of the materialized tree and the child
    // hangs below it; earlier history cannot enter either clade.
    tree_.add(s.parent_type, 0);
    tree_.add(s.child_type, 0);
    if (s.remaining_budget == 0) {
      // Terminal observation: no action is taken, the selection is final.
      head_ = 0;
      score(0, 1, 1.0);
    } else {
      head_ = action == GodelAction::KeepParent ? 0 : 1;
      step(head_, s.remaining_budget, 1.0);
    }
    return result_;
  }

 private:
  // `x` becomes the parent and produces one child; budget b >= 1 remains.
  void step(std::size_t x, std::size_t b, double prob) {
    for (std::size_t k = 0; k < mdp_.types(); ++k) {
      const double p = mdp_.transition[tree_.type[x]][k];
      if (p == 0.0) continue;
      const std::size_t child = tree_.add(k, x);
      const double q = prob * p;
      if (b == 1) {
        score(x, child, q);
      } else {
        const GodelState obs{tree_.type[x], k, b - 1};
        const GodelAction a = policy_(obs);
        step(a == GodelAction::KeepParent ? x : child, b - 1, q);
      }
      tree_.type.pop_back();
      tree_.parent.pop_back();
    }
  }

  void score(std::size_t final_parent, std::size_t final_child, double prob) {
    ++result_.trajectories;
    result_.probability_mass += prob;
    double u = 0.0;
    if (rule_ == ScoreRule::FinalPair) {
      const double up = mdp_.utilities[tree_.type[final_parent]];
      const double uc = mdp_.utilities[tree_.type[final_child]];
      const std::size_t selected = uc > up ? final_child : final_parent;
      if (!tree_.in_clade(selected, head_)) {
        // The selection lies outside the clade: the clade's score indicator is
        // zero everywhere, so the best clade member is ill-defined. Count it
        // and take the clade's own best observed pair member.
        result_.selection_outside_clade = true;
        u = 0.0;
        for (std::size_t n : {final_parent, final_child}) {
          if (tree_.in_clade(n, head_)) u = std::max(u, mdp_.utilities[tree_.type[n]]);
        }
      } else {
        u = std::max(up, uc);
      }
    } else {
      for (std::size_t n = 0; n < tree_.type.size(); ++n) {
        if (tree_.in_clade(n, head_)) u = std::max(u, mdp_.utilities[tree_.type[n]]);
      }
    }
    result_.value += prob * u;
  }

  const MicroMDP& mdp_;
  const ChainPolicy& policy_;
  ScoreRule rule_;
  AgentTree tree_;
  std::size_t head_ = 0;
  Enumeration result_;
};

std::uint64_t trajectory_bound(const MicroMDP& mdp, std::size_t budget, std::uint64_t cap) {
  std::uint64_t branching = 0;
  for (const auto& row : mdp.transition) {
    branching = std::max<std::uint64_t>(
        branching, static_cast<std::uint64_t>(std::count_if(row.begin(), row.end(), [](double p) { return p > 0.0; })));
  }
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < budget; ++i) {
    count *= std::max<std::uint64_t>(branching, 1);
    if (count > cap) return count;
  }
  return count;
}

}  // namespace

Enumeration enumerate_cmp(const MicroMDP& mdp, const GodelState& state, GodelAction action,
                          const ChainPolicy& policy, ScoreRule rule, std::uint64_t max_trajectories) {
  check_state(mdp, state);
  const std::uint64_t bound = trajectory_bound(mdp, state.remaining_budget, max_trajectories);
  if (bound > max_trajectories) {
    throw CapacityError("enumeration would visit " + std::to_string(bound) + " trajectories (limit " +
                        std::to_string(max_trajectories) + ")");
  }
  Enumerator e(mdp, policy, rule);
  return e.run(state, action);
}

double cmp_exact(const MicroMDP& mdp, const GodelState& state, GodelAction action, const ChainPolicy& policy,
                 ScoreRule rule, std::uint64_t max_trajectories) {
  return enumerate_cmp(mdp, state, action, policy, rule, max_trajectories).value;
}

ChainPolicy cmp_greedy_policy(const MicroMDP& mdp, double cmp_fault, std::uint64_t max_trajectories) {
  // Decisions at budget b only consult decisions at smaller budgets, so the
  // recursion through the shared memo terminates.
  struct State {
    MicroMDP mdp;
    double fault;
    std::uint64_t cap;
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, GodelAction> memo;
  };
  auto shared = std::make_shared<State>(State{mdp, cmp_fault, max_trajectories, {}});
  auto self = std::make_shared<ChainPolicy>();
  std::weak_ptr<ChainPolicy> weak = self;
  *self = [shared, weak](const GodelState& s) -> GodelAction {
    if (s.remaining_budget == 0) return GodelAction::KeepParent;
    const auto key = std::make_tuple(s.parent_type, s.child_type, s.remaining_budget);
    if (auto it = shared->memo.find(key); it != shared->memo.end()) return it->second;
    auto policy = weak.lock();
    const double keep = cmp_exact(shared->mdp, s, GodelAction::KeepParent, *policy, ScoreRule::FinalPair, shared->cap);
    const double accept =
        cmp_exact(shared->mdp, s, GodelAction::AcceptChild, *policy, ScoreRule::FinalPair, shared->cap) +
        shared->fault;
    const GodelAction a = accept > keep + kTieTolerance ? GodelAction::AcceptChild : GodelAction::KeepParent;
    shared->memo.emplace(key, a);
    return a;
  };
  // The returned wrapper owns the recursive function object.
  return [self](const GodelState& s) { return (*self)(s); };
}

TheoremReport verify_theorem(const MicroMDP& mdp, const VerifyOptions& options) {
  mdp.validate();
  TheoremReport report;
  report.name = mdp.name;
  const ChainPolicy greedy = cmp_greedy_policy(mdp, options.cmp_fault, options.max_trajectories);
  ValueTable table(mdp);

  for (const GodelState& s : reachable_states(mdp)) {
    ++report.states_checked;
    double cmp_values[2];
    double q_values[2];
    for (GodelAction a : {GodelAction::KeepParent, GodelAction::AcceptChild}) {
      const Enumeration e = enumerate_cmp(mdp, s, a, greedy, ScoreRule::FinalPair, options.max_trajectories);
      const double fault = a == GodelAction::AcceptChild ? options.cmp_fault : 0.0;
      const double cmp = e.value + fault;
      const double q = table.q(s, a);
      const int i = a == GodelAction::KeepParent ? 0 : 1;
      cmp_values[i] = cmp;
      q_values[i] = q;
      ++report.pairs_checked;
      const double gap = std::abs(cmp - q);
      report.max_abs_gap = std::max(report.max_abs_gap, gap);
      report.max_mass_error = std::max(report.max_mass_error, std::abs(e.probability_mass - 1.0));
      if (gap > options.tolerance) {
        report.violations.push_back({s, a, "cmp differs from q", cmp, q});
      }
      if (std::abs(e.probability_mass - 1.0) > 1e-12) {
        report.violations.push_back({s, a, "trajectory probabilities do not sum to 1", e.probability_mass, 1.0});
      }
      if (e.selection_outside_clade) {
        report.violations.push_back({s, a, "selected agent outside the clade", cmp, q});
      }
    }
    if (s.remaining_budget == 0) continue;
    const GodelAction chosen = greedy(s);
    const GodelAction optimal =
        q_values[1] > q_values[0] + kTieTolerance ? GodelAction::AcceptChild : GodelAction::KeepParent;
    if (chosen != optimal) {
      const int ci = chosen == GodelAction::KeepParent ? 0 : 1;
      const int oi = optimal == GodelAction::KeepParent ? 0 : 1;
      report.violations.push_back({s, std::nullopt,
                                   std::string("cmp-greedy chose ") + to_string(chosen) + ", optimum is " +
                                       to_string(optimal),
                                   cmp_values[ci], q_values[oi]});
    }
  }
  report.passed = report.violations.empty();
  return report;
}

MicroMDP random_micro_mdp(RandomStream& rng, std::size_t max_types, std::size_t max_budget) {
  if (max_types == 0 || max_types > 5) throw ParameterError("max_types must lie in [1,5]");
  if (max_budget > 4) throw ParameterError("max_budget must be at most 4");
  MicroMDP mdp;
  const std::size_t k = 1 + rng.index_below(max_types);
  mdp.budget = rng.index_below(max_budget + 1);
  mdp.root_type = rng.index_below(k);
  for (std::size_t i = 0; i < k; ++i) mdp.utilities.push_back(rng.uniform_open());
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> row(k);
    double sum = 0.0;
    for (auto& p : row) {
      // Sparse rows exercise zero-probability branches.
      p = rng.uniform_open() < 0.25 ? 0.0 : rng.uniform_open();
      sum += p;
    }
    if (sum == 0.0) {
      row[rng.index_below(k)] = 1.0;
      sum = 1.0;
    }
    for (auto& p : row) p /= sum;
    mdp.transition.push_back(std::move(row));
  }
  mdp.validate();
  return mdp;
}

namespace {

MicroMDP instance_from_json(const nlohmann::json& j, std::size_t index) {
  MicroMDP mdp;
  try {
    for (const auto& [key, _] : j.items()) {
      if (key != "name" && key != "utilities" && key != "transition" && key != "budget" && key != "root_type") {
        throw ParameterError("unknown field '" + key + "'");
      }
    }
    mdp.name = j.value("name", "instance_" + std::to_string(index));
    mdp.utilities = j.at("utilities").get<std::vector<double>>();
    mdp.transition = j.at("transition").get<std::vector<std::vector<double>>>();
    mdp.budget = j.at("budget").get<std::size_t>();
    mdp.root_type = j.value("root_type", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("instance " + std::to_string(index) + ": " + e.what());
  }
  try {
    mdp.validate();
  } catch (const ParameterError& e) {
    throw ParameterError("instance " + std::to_string(index) + ": " + e.what());
  }
  return mdp;
}

}  // namespace

std::vector<MicroMDP> instances_from_json(const nlohmann::json& doc) {
  std::vector<MicroMDP> out;
  if (doc.is_object() && doc.contains("instances")) {
    const auto& list = doc.at("instances");
    if (!list.is_array()) throw ParameterError("'instances' must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) out.push_back(instance_from_json(list[i], i));
  } else if (doc.is_object()) {
    out.push_back(instance_from_json(doc, 0));
  } else {
    throw ParameterError("instance file must hold an object");
  }
  return out;
}

std::vector<MicroMDP> load_instances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, e.what());
  }
  return instances_from_json(doc);
}

nlohmann::json to_json(const MicroMDP& mdp) {
  return {{"name", mdp.name},
          {"utilities", mdp.utilities},
          {"transition", mdp.transition},
          {"budget", mdp.budget},
          {"root_type", mdp.root_type}};
}

}  // namespace hgm::godel
