#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgm/random.hpp"

namespace hgm::godel {

// Finite self-modification kernel over agent types. Budget counts
// self-modifications; evaluations are free because utilities are known.
struct MicroMDP {
  std::string name;
  std::vector<double> utilities;
  std::vector<std::vector<double>> transition;  // rows sum to 1
  std::size_t budget = 0;
  std::size_t root_type = 0;

  std::size_t types() const noexcept { return utilities.size(); }
  void validate() const;
};

// Observation of the accept/reject process: the current parent and child
// types plus the remaining number of self-modifications.
struct GodelState {
  std::size_t parent_type = 0;
  std::size_t child_type = 0;
  std::size_t remaining_budget = 0;
  friend bool operator==(const GodelState&, const GodelState&) = default;
};

enum class GodelAction { KeepParent, AcceptChild };

const char* to_string(GodelAction action);

// The root observed against an identical first child, with the full budget.
GodelState initial_state(const MicroMDP& mdp);

// Every state reachable from initial_state (terminal states included), in BFS order.
std::vector<GodelState> reachable_states(const MicroMDP& mdp);

// Values within this distance count as tied; ties always keep the parent.
inline constexpr double kTieTolerance = 1e-12;

// ---- dynamic programming ------------------------------------------------

// Optimal-continuation action value by backward induction. With no budget left
// both actions are worth the better of parent and child.
double q_value(const MicroMDP& mdp, const GodelState& state, GodelAction action);
double state_value(const MicroMDP& mdp, const GodelState& state);
GodelAction dp_optimal_action(const MicroMDP& mdp, const GodelState& state);

// ---- trajectory enumeration -----------------------------------------------

using ChainPolicy = std::function<GodelAction(const GodelState&)>;

enum class ScoreRule {
  FinalPair,  // select the better of the final parent/child (ties: parent)
  CladeMax,   // best utility anywhere in the clade
};

struct Enumeration {
  double value = 0.0;               // expected utility of the selected agent
  double probability_mass = 0.0;    // should be 1
  std::uint64_t trajectories = 0;
  bool selection_outside_clade = false;
};

// Enumerates every trajectory that starts by taking `action` in `state` and then
// follows `policy`, building the agent tree explicitly and scoring the agent
// selected inside the clade of the action's agent. Throws CapacityError when
// the trajectory count would exceed max_trajectories.
Enumeration enumerate_cmp(const MicroMDP& mdp, const GodelState& state, GodelAction action,
                          const ChainPolicy& policy, ScoreRule rule = ScoreRule::FinalPair,
                          std::uint64_t max_trajectories = 1'000'000);

double cmp_exact(const MicroMDP& mdp, const GodelState& state, GodelAction action, const ChainPolicy& policy,
                 ScoreRule rule = ScoreRule::FinalPair, std::uint64_t max_trajectories = 1'000'000);

// Accepts the child iff its clade-metaproductivity (computed by enumeration under
// this same policy) beats the parent's by more than kTieTolerance. `cmp_fault`
// is added to the child's value (fault injection only).
ChainPolicy cmp_greedy_policy(const MicroMDP& mdp, double cmp_fault = 0.0,
                              std::uint64_t max_trajectories = 1'000'000);

struct Violation {
  GodelState state;
  std::optional<GodelAction> action;
  std::string what;
  double cmp = 0.0;
  double q = 0.0;
};

struct TheoremReport {
  std::string name;
  bool passed = true;
  std::size_t states_checked = 0;
  std::size_t pairs_checked = 0;
  double max_abs_gap = 0.0;
  double max_mass_error = 0.0;
  std::vector<Violation> violations;
};

struct VerifyOptions {
  double tolerance = 1e-9;
  double cmp_fault = 0.0;
  std::uint64_t max_trajectories = 1'000'000;
};

// Checks cmp_exact == q_value on every reachable (state, action) and that the
// CMP-greedy decision equals the DP-optimal decision at every reachable state.
TheoremReport verify_theorem(const MicroMDP& mdp, const VerifyOptions& options = {});

MicroMDP random_micro_mdp(RandomStream& rng, std::size_t max_types, std::size_t max_budget);

// {"instances": [ {utilities, transition, budget, root_type?, name?}, ... ]}
// or a single instance object.
std::vector<MicroMDP> instances_from_json(const nlohmann::json& doc);
std::vector<MicroMDP> load_instances(const std::filesystem::path& path);
nlohmann::json to_json(const MicroMDP& mdp);

}  // namespace hgm::godel
