#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "hgm/errors.hpp"
#include "hgm/godel/micro_mdp.hpp"

using namespace hgm;
using namespace hgm::godel;

namespace {

MicroMDP make(std::vector<double> u, std::vector<std::vector<double>> t, std::size_t budget) {
  MicroMDP m;
  m.utilities = std::move(u);
  m.transition = std::move(t);
  m.budget = budget;
  m.validate();
  return m;
}

// Plain expectimax written from the definitions, no memo, no shared code.
double oracle_value(const MicroMDP& m, std::size_t p, std::size_t c, std::size_t b);

double oracle_q(const MicroMDP& m, std::size_t p, std::size_t c, std::size_t b, bool accept) {
  if (b == 0) return std::max(m.utilities[p], m.utilities[c]);
  const std::size_t x = accept ? c : p;
  double v = 0.0;
  for (std::size_t k = 0; k < m.types(); ++k) {
    if (m.transition[x][k] > 0.0) v += m.transition[x][k] * oracle_value(m, x, k, b - 1);
  }
  return v;
}

double oracle_value(const MicroMDP& m, std::size_t p, std::size_t c, std::size_t b) {
  return std::max(oracle_q(m, p, c, b, false), oracle_q(m, p, c, b, true));
}

std::filesystem::path source_path(const std::string& rel) { return std::filesystem::path(HGM_SOURCE_DIR) / rel; }

}  // namespace

TEST_CASE("hand-computed action values") {
  const MicroMDP m = make({0.0, 1.0}, {{0.5, 0.5}, {0.0, 1.0}}, 2);
  CHECK(q_value(m, {0, 0, 1}, GodelAction::KeepParent) == doctest::Approx(0.5));
  CHECK(q_value(m, {0, 1, 1}, GodelAction::KeepParent) == doctest::Approx(0.5));
  CHECK(q_value(m, {0, 1, 1}, GodelAction::AcceptChild) == doctest::Approx(1.0));
  CHECK(q_value(m, {0, 0, 2}, GodelAction::KeepParent) == doctest::Approx(0.75));
  CHECK(q_value(m, {0, 1, 0}, GodelAction::KeepParent) == 1.0);
  CHECK(q_value(m, {0, 1, 0}, GodelAction::AcceptChild) == 1.0);
}

TEST_CASE("a low-utility child with a productive lineage is worth accepting") {
  const MicroMDP m = make({0.6, 0.1, 1.0}, {{0.9, 0.1, 0.0}, {0.0, 0.5, 0.5}, {0.0, 0.0, 1.0}}, 2);
  // One modification left: the weak child cannot pay off in time.
  CHECK(q_value(m, {0, 1, 1}, GodelAction::KeepParent) == doctest::Approx(0.6));
  CHECK(q_value(m, {0, 1, 1}, GodelAction::AcceptChild) == doctest::Approx(0.55));
  CHECK(dp_optimal_action(m, {0, 1, 1}) == GodelAction::KeepParent);
  // Two left: it does.
  CHECK(q_value(m, {0, 1, 2}, GodelAction::KeepParent) == doctest::Approx(0.6));
  CHECK(q_value(m, {0, 1, 2}, GodelAction::AcceptChild) == doctest::Approx(0.775));
  CHECK(dp_optimal_action(m, {0, 1, 2}) == GodelAction::AcceptChild);
  const ChainPolicy greedy = cmp_greedy_policy(m);
  CHECK(greedy({0, 1, 2}) == GodelAction::AcceptChild);
  CHECK(greedy({0, 1, 1}) == GodelAction::KeepParent);
}

TEST_CASE("identity transitions never change the lineage") {
  const MicroMDP m = make({0.3, 0.8}, {{1, 0}, {0, 1}}, 3);
  for (std::size_t b = 0; b <= 3; ++b) CHECK(state_value(m, {0, 0, b}) == doctest::Approx(0.3));
  CHECK(q_value(m, {0, 1, 2}, GodelAction::AcceptChild) == doctest::Approx(0.8));
  CHECK(q_value(m, {0, 1, 2}, GodelAction::KeepParent) == doctest::Approx(0.3));
  CHECK(reachable_states(m).size() == 4);
  CHECK(verify_theorem(m).passed);
}

TEST_CASE("a dominant absorbing type") {
  const MicroMDP m = make({0.2, 0.5, 0.9}, {{0.5, 0.3, 0.2}, {0.2, 0.5, 0.3}, {0, 0, 1}}, 4);
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t b = 1; b <= 4; ++b) {
      CHECK(dp_optimal_action(m, {p, 2, b}) == (p == 2 ? GodelAction::KeepParent : GodelAction::AcceptChild));
      CHECK(state_value(m, {p, 2, b}) == doctest::Approx(0.9));
    }
  }
  const TheoremReport r = verify_theorem(m);
  CHECK(r.passed);
  CHECK(r.max_abs_gap <= 1e-12);
}

TEST_CASE("dynamic programming agrees with a plain expectimax") {
  RandomStream rng = RandomStream::keyed(3, StreamDomain::Test, 0);
  for (int i = 0; i < 60; ++i) {
    const MicroMDP m = random_micro_mdp(rng, 4, 4);
    for (const GodelState& s : reachable_states(m)) {
      for (bool accept : {false, true}) {
        const GodelAction a = accept ? GodelAction::AcceptChild : GodelAction::KeepParent;
        CHECK(q_value(m, s, a) ==
              doctest::Approx(oracle_q(m, s.parent_type, s.child_type, s.remaining_budget, accept)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("values are monotone in remaining budget and bounded") {
  RandomStream rng = RandomStream::keyed(4, StreamDomain::Test, 0);
  for (int i = 0; i < 60; ++i) {
    const MicroMDP m = random_micro_mdp(rng, 4, 4);
    const double top = *std::max_element(m.utilities.begin(), m.utilities.end());
    for (std::size_t p = 0; p < m.types(); ++p) {
      for (std::size_t c = 0; c < m.types(); ++c) {
        double prev = std::max(m.utilities[p], m.utilities[c]);
        CHECK(state_value(m, {p, c, 0}) == prev);
        for (std::size_t b = 1; b <= 4; ++b) {
          const double v = state_value(m, {p, c, b});
          CHECK(v >= prev - 1e-15);
          CHECK(v <= top + 1e-15);
          prev = v;
        }
      }
    }
  }
}

TEST_CASE("enumeration covers all probability mass") {
  RandomStream rng = RandomStream::keyed(5, StreamDomain::Test, 0);
  for (int i = 0; i < 40; ++i) {
    const MicroMDP m = random_micro_mdp(rng, 4, 4);
    const ChainPolicy policy = [&m](const GodelState& s) { return dp_optimal_action(m, s); };
    for (const GodelState& s : reachable_states(m)) {
      for (auto a : {GodelAction::KeepParent, GodelAction::AcceptChild}) {
        const Enumeration e = enumerate_cmp(m, s, a, policy);
        CHECK(std::abs(e.probability_mass - 1.0) <= 1e-12);
        CHECK_FALSE(e.selection_outside_clade);
        CHECK(e.trajectories >= 1);
      }
    }
  }
}

TEST_CASE("enumeration under the optimal policy reproduces the action values") {
  // Independent sampling check of the same quantity: simulate the chain.
  const MicroMDP m = make({0.6, 0.1, 1.0}, {{0.9, 0.1, 0.0}, {0.0, 0.5, 0.5}, {0.0, 0.0, 1.0}}, 4);
  RandomStream rng = RandomStream::keyed(6, StreamDomain::Test, 0);
  const GodelState s0{0, 1, 4};
  for (auto first : {GodelAction::KeepParent, GodelAction::AcceptChild}) {
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      std::size_t p = s0.parent_type, c = s0.child_type;
      GodelAction a = first;
      for (std::size_t b = s0.remaining_budget; b > 0; --b) {
        const std::size_t x = a == GodelAction::AcceptChild ? c : p;
        const double r = rng.uniform_open();
        std::size_t k = 0;
        double acc = m.transition[x][0];
        while (r >= acc && k + 1 < m.types()) acc += m.transition[x][++k];
        p = x;
        c = k;
        if (b > 1) a = dp_optimal_action(m, {p, c, b - 1});
      }
      sum += std::max(m.utilities[p], m.utilities[c]);
    }
    const double mc = sum / n;
    CHECK(std::abs(mc - q_value(m, s0, first)) <= 4.0 * 0.5 / std::sqrt(n));
  }
}

TEST_CASE("enumeration refuses to exceed its trajectory cap") {
  const MicroMDP m = make({0.1, 0.2, 0.3}, {{0.3, 0.3, 0.4}, {0.3, 0.3, 0.4}, {0.3, 0.3, 0.4}}, 4);
  const ChainPolicy keep = [](const GodelState&) { return GodelAction::KeepParent; };
  CHECK_NOTHROW(enumerate_cmp(m, initial_state(m), GodelAction::KeepParent, keep, ScoreRule::FinalPair, 81));
  CHECK_THROWS_AS(enumerate_cmp(m, initial_state(m), GodelAction::KeepParent, keep, ScoreRule::FinalPair, 80),
                  CapacityError);
  VerifyOptions opt;
  opt.max_trajectories = 10;
  CHECK_THROWS_AS(verify_theorem(m, opt), CapacityError);
}

TEST_CASE("CMP equals the action value on random instances") {
  RandomStream rng = RandomStream::keyed(7, StreamDomain::Test, 0);
  std::size_t pairs = 0;
  double gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    const MicroMDP m = random_micro_mdp(rng, 4, 4);
    const TheoremReport r = verify_theorem(m);
    INFO("instance " << i);
    CHECK(r.passed);
    CHECK(r.violations.empty());
    pairs += r.pairs_checked;
    gap = std::max(gap, r.max_abs_gap);
  }
  CHECK(pairs > 1000);
  CHECK(gap <= 1e-9);
}

TEST_CASE("an injected CMP fault is reported") {
  const MicroMDP m = make({0.3, 0.8}, {{1, 0}, {0, 1}}, 3);
  VerifyOptions opt;
  opt.cmp_fault = 0.05;
  const TheoremReport r = verify_theorem(m, opt);
  CHECK_FALSE(r.passed);
  CHECK_FALSE(r.violations.empty());

  RandomStream rng = RandomStream::keyed(8, StreamDomain::Test, 0);
  int caught = 0;
  for (int i = 0; i < 50; ++i) caught += !verify_theorem(random_micro_mdp(rng, 4, 4), opt).passed;
  CHECK(caught > 0);
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(make({0.1}, {{0.5}}, 1), ParameterError);
  CHECK_THROWS_AS(make({0.1, 1.2}, {{1, 0}, {0, 1}}, 1), ParameterError);
  CHECK_THROWS_AS(make({0.1, 0.2}, {{1, 0}, {0, 1}}, 5), ParameterError);
  CHECK_THROWS_AS(make({0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, std::vector<std::vector<double>>(6, {1, 0, 0, 0, 0, 0}), 1),
                  ParameterError);
  CHECK_THROWS_AS(make({0.1, 0.2}, {{1, 0}}, 1), ParameterError);
  MicroMDP m = make({0.1, 0.2}, {{1, 0}, {0, 1}}, 1);
  m.root_type = 2;
  CHECK_THROWS_AS(m.validate(), ParameterError);
  CHECK_THROWS_AS(q_value(make({0.1, 0.2}, {{1, 0}, {0, 1}}, 1), {0, 3, 1}, GodelAction::KeepParent),
                  ParameterError);
}

TEST_CASE("instance files") {
  const auto list = load_instances(source_path("configs/oracle_instances.json"));
  REQUIRE(list.size() == 3);
  CHECK(list[0].name == "identity");
  for (const auto& m : list) CHECK(verify_theorem(m).passed);

  const MicroMDP round = instances_from_json(to_json(list[1])).at(0);
  CHECK(round.utilities == list[1].utilities);
  CHECK(round.transition == list[1].transition);
  CHECK(round.budget == list[1].budget);

  nlohmann::json bad = to_json(list[0]);
  bad["utility"] = 1;
  CHECK_THROWS_AS(instances_from_json(bad), ParameterError);
  CHECK_THROWS_AS(instances_from_json(nlohmann::json::array()), ParameterError);

  const auto dir = std::filesystem::temp_directory_path() / "hgm_godel_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "broken.json") << "{\"instances\": [";
  CHECK_THROWS_AS(load_instances(dir / "broken.json"), ParseError);
}
