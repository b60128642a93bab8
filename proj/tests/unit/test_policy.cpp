#include <doctest.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hgm/errors.hpp"
#include "hgm/policy/policy.hpp"
#include "../support/oracles.hpp"

using namespace hgm;
using namespace hgm::policy;
using bandit::Tau;

namespace {

RandomStream test_stream(std::uint64_t index) { return RandomStream::keyed(13, StreamDomain::Test, index); }

// Gives `agent` the stated number of successes and failures on its first tasks.
void give(SearchTree& t, AgentId agent, std::size_t successes, std::size_t failures) {
  std::size_t task = t.node(agent).evaluations();
  for (std::size_t i = 0; i < successes; ++i) t.record_evaluation(agent, TaskId{task++}, true);
  for (std::size_t i = 0; i < failures; ++i) t.record_evaluation(agent, TaskId{task++}, false);
}

// N^alpha >= size in 50 significant digits, with alpha taken as the decimal
// the configuration spells (0.6 rather than its nearest double). 0^0 = 1.
bool widening_oracle(std::uint64_t n, double alpha, std::size_t size) {
  using big = boost::multiprecision::cpp_bin_float_50;
  char text[32];
  const auto res = std::to_chars(text, text + sizeof text, alpha);
  const big a(std::string(text, res.ptr));
  const big lhs = n == 0 ? big(alpha == 0.0 ? 1 : 0) : boost::multiprecision::pow(big(n), a);
  // Exact powers such as 1521^0.5 come back a few ulps low at 50 digits.
  return lhs >= big(size) * (1 - big("1e-40"));
}

}  // namespace

TEST_CASE("PolicyConfig validation") {
  PolicyConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha_widening = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = {};
  cfg.epsilon_percentile = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.epsilon_percentile = 100.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.epsilon_percentile = 100.5;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("policy kind names") {
  CHECK(to_string(PolicyKind::HGM) == "hgm");
  CHECK(policy_kind_from_string("greedy") == PolicyKind::Greedy);
  CHECK(policy_kind_from_string("dgm_like") == PolicyKind::DGMLike);
  CHECK_THROWS_AS(policy_kind_from_string("ucb"), ParameterError);
}

TEST_CASE("decide_action_kind examples") {
  PolicyConfig cfg;
  BudgetState b{800, 32, 0, 0};
  CHECK(decide_action_kind(b, 8, cfg) == ActionKind::Expand);
  b.committed_evals = 10;
  CHECK(decide_action_kind(b, 5, cfg) == ActionKind::Evaluate);
  b.committed_evals = 0;
  CHECK(decide_action_kind(b, 1, cfg) == ActionKind::Evaluate);
  // In-flight evaluations count toward N.
  b = {800, 20, 12, 0};
  CHECK(decide_action_kind(b, 8, cfg) == ActionKind::Expand);
  // A pending expansion enlarges the effective size by one.
  CHECK(decide_action_kind(b, 9, cfg) == ActionKind::Evaluate);
}

TEST_CASE("widening rule agrees with a 50-digit oracle") {
  CHECK(widening_oracle(10, 0.6, 5) == false);
  CHECK(widening_oracle(32, 0.6, 8) == true);
  for (std::uint64_t n = 0; n <= 2000; ++n) {
    for (double alpha : {0.0, 0.25, 0.5, 0.6, 0.75, 1.0}) {
      using big = boost::multiprecision::cpp_bin_float_50;
      const big p = boost::multiprecision::pow(big(n), big(alpha));
      const auto floor_size = static_cast<std::size_t>(p);
      for (std::size_t size : {floor_size, floor_size + 1}) {
        if (size == 0) continue;
        INFO("n=" << n << " alpha=" << alpha << " size=" << size);
        CHECK(widening_allows_expansion(n, alpha, size) == widening_oracle(n, alpha, size));
      }
    }
  }
}

TEST_CASE("tau follows B over committed remaining budget") {
  PolicyConfig cfg;
  CHECK(tau_for({800, 0, 5, 0}, cfg).value() == 1.0);
  CHECK(tau_for({800, 400, 30, 2}, cfg).value() == 2.0);
  cfg.scheduler = SchedulerKind::Constant;
  cfg.constant_tau = 3.5;
  CHECK(tau_for({800, 400, 0, 0}, cfg).value() == 3.5);
}

TEST_CASE("select_expansion_parent") {
  SearchTree single(5);
  RandomStream rng = test_stream(1);
  for (int i = 0; i < 100; ++i) CHECK(select_expansion_parent(single, Tau(1.0), rng) == single.root());

  // Clades (50, 0) and (0, 50) on two children; the root's clade is (50, 50).
  SearchTree t(100);
  const AgentId a = t.add_child(t.root());
  const AgentId b = t.add_child(t.root());
  give(t, a, 50, 0);
  give(t, b, 0, 50);
  int a_wins = 0, b_wins = 0;
  for (int i = 0; i < 10000; ++i) {
    const AgentId pick = select_expansion_parent(t, Tau(1.0), rng);
    a_wins += pick == a;
    b_wins += pick == b;
  }
  const double p_oracle = oracle::prob_first_exceeds_mc(51, 1, 1, 51, 0xBEEF, 100000);
  CHECK(p_oracle > 0.999);
  CHECK(a_wins >= 9990);
  CHECK(b_wins == 0);

  SearchTree eq(20);
  const AgentId x = eq.add_child(eq.root());
  const AgentId y = eq.add_child(eq.root());
  give(eq, x, 3, 3);
  give(eq, y, 3, 3);
  int xs = 0, ys = 0;
  for (int i = 0; i < 10000; ++i) {
    const AgentId pick = select_expansion_parent(eq, Tau(1.0), rng);
    xs += pick == x;
    ys += pick == y;
  }
  // x and y are exchangeable; the root's clade posterior is sharper.
  CHECK(std::abs(static_cast<double>(xs) / (xs + ys) - 0.5) <= 0.015);
}

TEST_CASE("select_expansion_parent concentrates as tau grows") {
  SearchTree t(100);
  const AgentId good = t.add_child(t.root());
  const AgentId bad = t.add_child(t.root());
  give(t, good, 6, 4);
  give(t, bad, 4, 6);
  std::vector<double> freq;
  for (double tau : {1.0, 10.0, 100.0}) {
    RandomStream rng = test_stream(3);
    int wins = 0;
    for (int i = 0; i < 20000; ++i) wins += select_expansion_parent(t, Tau(tau), rng) == good;
    freq.push_back(wins / 20000.0);
  }
  CHECK(freq[0] < freq[1]);
  CHECK(freq[1] < freq[2]);
  CHECK(freq[2] > 0.95);
}

TEST_CASE("select_evaluation_agent") {
  RandomStream rng = test_stream(4);
  SearchTree one(3);
  CHECK(select_evaluation_agent(one, Tau(1.0), rng) == one.root());

  SearchTree t(20);
  const AgentId a = t.add_child(t.root());
  const AgentId b = t.add_child(t.root());
  give(t, a, 9, 1);
  give(t, b, 1, 9);
  give(t, t.root(), 0, 20);  // root has no remaining tasks
  const int n = 100000;
  int a_wins = 0;
  for (int i = 0; i < n; ++i) {
    const auto pick = select_evaluation_agent(t, Tau(1.0), rng);
    REQUIRE(pick.has_value());
    CHECK(*pick != t.root());
    a_wins += *pick == a;
  }
  const double p = oracle::prob_first_exceeds_mc(10, 2, 2, 10, 0xFACE, n);
  const double se = std::sqrt(2.0 * p * (1.0 - p) / n);
  CHECK(std::abs(a_wins / static_cast<double>(n) - p) <= 3.0 * se);

  SearchTree starved(2);
  give(starved, starved.root(), 1, 1);
  CHECK_FALSE(select_evaluation_agent(starved, Tau(1.0), rng).has_value());
}

TEST_CASE("select_task") {
  RandomStream rng = test_stream(5);
  SearchTree t(10);
  for (std::size_t i = 0; i < 10; ++i) {
    if (i != 7) t.record_evaluation(t.root(), TaskId{i}, true);
  }
  CHECK(select_task(t.node(t.root()), rng).index == 7);

  SearchTree u(5);
  u.record_evaluation(u.root(), TaskId{0}, true);
  std::map<std::size_t, int> counts;
  for (int i = 0; i < 10000; ++i) ++counts[select_task(u.node(u.root()), rng).index];
  CHECK(counts.size() == 4);
  for (std::size_t k = 1; k <= 4; ++k) CHECK(std::abs(counts[k] / 10000.0 - 0.25) <= 0.02);

  SearchTree w(30);
  std::set<std::size_t> drawn;
  for (int i = 0; i < 30; ++i) {
    const TaskId task = select_task(w.node(w.root()), rng);
    CHECK(drawn.insert(task.index).second);
    w.record_evaluation(w.root(), task, true);
  }
  CHECK(drawn.size() == 30);
  CHECK_THROWS_AS(select_task(w.node(w.root()), rng), UsageError);
}

TEST_CASE("best_belief_agent examples") {
  SearchTree single(5);
  CHECK(best_belief_agent(single, 1.0) == single.root());

  SearchTree t(40);
  const AgentId a = t.add_child(t.root());
  const AgentId b = t.add_child(t.root());
  give(t, a, 3, 0);
  give(t, b, 30, 3);
  CHECK(best_belief_score(t.node(a), 1.0) == doctest::Approx(std::pow(0.01, 0.25)).epsilon(1e-9));
  CHECK(best_belief_score(t.node(a), 1.0) < best_belief_score(t.node(b), 1.0));
  CHECK(best_belief_agent(t, 1.0) == b);

  SearchTree zeros(3);
  zeros.add_child(zeros.root());
  zeros.add_child(zeros.root());
  CHECK(best_belief_agent(zeros, 1.0) == zeros.root());
}

TEST_CASE("best_belief_agent ties prefer more evaluations, then the smaller id") {
  // Equal scores with different evaluation counts cannot come from the quantile
  // rule, so exercise the tie chain through argmax_with_ties.
  SearchTree t(10);
  const AgentId a = t.add_child(t.root());
  const AgentId b = t.add_child(t.root());
  give(t, a, 1, 1);
  give(t, b, 2, 2);
  auto flat = [](const AgentNode&) { return 0.5; };
  CHECK(argmax_with_ties(t, flat) == b);
  give(t, a, 1, 1);
  CHECK(argmax_with_ties(t, flat) == a);
}

TEST_CASE("best_belief_agent depends only on counters") {
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    RandomStream rng = test_stream(1000 + trial);
    const std::size_t n = 2 + rng.index_below(8);
    std::vector<std::pair<std::size_t, std::size_t>> counts;
    std::set<std::pair<std::size_t, std::size_t>> distinct;
    while (counts.size() < n) {
      const std::pair<std::size_t, std::size_t> c{rng.index_below(15), rng.index_below(15)};
      if (distinct.insert(c).second) counts.push_back(c);
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index_below(i)]);

    // Flat trees: the root carries counts[0] (or counts[perm[0]]).
    auto build = [&](const std::vector<std::size_t>& order) {
      SearchTree t(40);
      for (std::size_t i = 1; i < n; ++i) t.add_child(t.root());
      for (std::size_t i = 0; i < n; ++i) give(t, AgentId{i}, counts[order[i]].first, counts[order[i]].second);
      return t;
    };
    std::vector<std::size_t> ident(n);
    for (std::size_t i = 0; i < n; ++i) ident[i] = i;
    const SearchTree plain = build(ident);
    const SearchTree shuffled = build(perm);
    const std::size_t winner_plain = best_belief_agent(plain, 1.0).index;
    const std::size_t winner_shuffled = best_belief_agent(shuffled, 1.0).index;
    CHECK(counts[winner_plain] == counts[perm[winner_shuffled]]);
  }
}

TEST_CASE("with fully evaluated agents the mean score reproduces argmax empirical mean") {
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    RandomStream rng = test_stream(5000 + trial);
    SearchTree t(20);
    const std::size_t n = 1 + rng.index_below(6);
    for (std::size_t i = 1; i < n; ++i) t.add_child(AgentId{rng.index_below(t.size())});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t s = rng.index_below(21);
      give(t, AgentId{i}, s, 20 - s);
    }
    const AgentId got = argmax_with_ties(t, [](const AgentNode& node) { return *node.empirical_mean(); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (t.node(AgentId{i}).n_success > t.node(AgentId{best}).n_success) best = i;
    }
    CHECK(got.index == best);
  }
}

TEST_CASE("greedy baseline") {
  RandomStream rng = test_stream(6);
  SearchTree t(20);
  PhaseState state;
  auto act = greedy_policy_step(t, state, rng);
  REQUIRE(act);
  CHECK(*act == Action::expand(t.root()));

  const AgentId c = t.add_child(t.root());
  state.current_child = c;
  give(t, c, 5, 5);
  act = greedy_policy_step(t, state, rng);
  REQUIRE(act);
  CHECK(act->kind == ActionKind::Evaluate);
  CHECK(act->agent == c);

  // Two fully evaluated agents at 0.6 and 0.4.
  SearchTree u(10);
  const AgentId hi = u.add_child(u.root());
  const AgentId lo = u.add_child(u.root());
  give(u, hi, 6, 4);
  give(u, lo, 4, 6);
  PhaseState done;
  done.current_child = lo;
  act = greedy_policy_step(u, done, rng);
  REQUIRE(act);
  CHECK(*act == Action::expand(hi));

  // Ties go to the most recently created agent.
  SearchTree v(10);
  const AgentId first = v.add_child(v.root());
  const AgentId second = v.add_child(v.root());
  give(v, first, 5, 5);
  give(v, second, 5, 5);
  act = greedy_policy_step(v, PhaseState{}, rng);
  REQUIRE(act);
  CHECK(*act == Action::expand(second));
}

TEST_CASE("greedy baseline never expands a partially evaluated agent") {
  for (std::uint64_t trial = 0; trial < 500; ++trial) {
    RandomStream rng = test_stream(9000 + trial);
    SearchTree t(6);
    const std::size_t n = 1 + rng.index_below(6);
    for (std::size_t i = 1; i < n; ++i) t.add_child(AgentId{rng.index_below(t.size())});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = rng.index_below(7);
      for (std::size_t j = 0; j < k; ++j) t.record_evaluation(AgentId{i}, TaskId{j}, rng.index_below(2) == 0);
    }
    const auto act = greedy_policy_step(t, PhaseState{}, rng);
    REQUIRE(act);
    if (act->kind == ActionKind::Expand && act->agent != t.root()) {
      CHECK(t.node(act->agent).evaluations() == t.task_count());
    }
    if (act->kind == ActionKind::Expand && t.node(act->agent).evaluations() != t.task_count()) {
      // Only allowed when nothing is fully evaluated.
      for (const auto& node : t.nodes()) CHECK(node.evaluations() != t.task_count());
    }
  }
}

TEST_CASE("dgm-like baseline") {
  PolicyConfig cfg;
  RandomStream rng = test_stream(7);
  SearchTree single(20);
  PhaseState s;
  for (int i = 0; i < 50; ++i) {
    const auto act = dgm_like_policy_step(single, s, cfg, rng);
    REQUIRE(act);
    CHECK(*act == Action::expand(single.root()));
  }

  // Equal means, child counts 0 and 3: weights 1 and 1/4.
  SearchTree t(20);
  const AgentId a = t.add_child(t.root());
  const AgentId b = t.add_child(t.root());
  for (int i = 0; i < 3; ++i) t.add_child(b);
  give(t, t.root(), 0, 20);  // root weight: (0+1)/(20+2)/(1+2), kept small
  give(t, a, 5, 5);
  give(t, b, 5, 5);
  for (std::size_t i = 3; i < t.size(); ++i) give(t, AgentId{i}, 0, 20);
  const double wa = dgm_parent_weight(t.node(a));
  const double wb = dgm_parent_weight(t.node(b));
  CHECK(wa / wb == doctest::Approx(4.0));
  int ca = 0, cb = 0;
  for (int i = 0; i < 10000; ++i) {
    PhaseState fresh;
    const auto act = dgm_like_policy_step(t, fresh, cfg, rng);
    ca += act->agent == a;
    cb += act->agent == b;
  }
  double total = 0.0;
  for (const auto& node : t.nodes()) total += dgm_parent_weight(node);
  const double pa = wa / total;
  const double pb = wb / total;
  CHECK(std::abs(ca / 10000.0 - pa) <= 3.0 * std::sqrt(pa * (1 - pa) / 10000));
  CHECK(std::abs(cb / 10000.0 - pb) <= 3.0 * std::sqrt(pb * (1 - pb) / 10000));
  CHECK(static_cast<double>(ca) / cb == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("dgm-like staging stops after a failed stage") {
  PolicyConfig cfg;
  cfg.dgm_stage_size = 10;
  cfg.dgm_stage_threshold = 0.4;
  RandomStream rng = test_stream(8);
  SearchTree t(30);
  const AgentId c = t.add_child(t.root());
  PhaseState s;
  s.current_child = c;
  // The first stage is requested task by task.
  for (int i = 0; i < 10; ++i) {
    const auto act = dgm_like_policy_step(t, s, cfg, rng);
    REQUIRE(act);
    REQUIRE(act->kind == ActionKind::Evaluate);
    t.record_evaluation(c, *act->task, i < 3);  // 3/10 < 0.4
  }
  const auto next = dgm_like_policy_step(t, s, cfg, rng);
  REQUIRE(next);
  CHECK(next->kind == ActionKind::Expand);
  CHECK(s.stage_passed == false);
  CHECK(t.node(c).evaluations() == 10);

  // A passing stage continues to the full task set.
  SearchTree u(30);
  const AgentId d = u.add_child(u.root());
  PhaseState p;
  p.current_child = d;
  int evals = 0;
  while (true) {
    const auto act = dgm_like_policy_step(u, p, cfg, rng);
    REQUIRE(act);
    if (act->kind == ActionKind::Expand) break;
    u.record_evaluation(d, *act->task, true);
    ++evals;
  }
  CHECK(evals == 30);
}

TEST_CASE("HGM policy issues init expansions and waits for them") {
  auto pol = make_policy(PolicyKind::HGM, PolicyConfig{}, 3);
  SearchTree t(10);
  RandomStream rng = test_stream(9);
  BudgetState b{100, 0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    const auto a = pol->next_action(t, b, rng);
    REQUIRE(a);
    CHECK(a->reason == "init");
    CHECK(a->action == Action::expand(t.root()));
    t.begin_expansion(t.root());
  }
  CHECK_FALSE(pol->next_action(t, b, rng).has_value());
  for (int i = 0; i < 3; ++i) {
    const AgentId child = t.finish_expansion(t.root());
    pol->on_expansion_committed(t.root(), child);
  }
  const auto a = pol->next_action(t, b, rng);
  REQUIRE(a);
  CHECK(a->reason == "evaluate");
}
