#include <doctest.h>

#include <set>

#include "hgm/errors.hpp"
#include "hgm/random.hpp"
#include "hgm/tree/search_tree.hpp"
#include "../support/brute.hpp"

using namespace hgm;

TEST_CASE("new tree") {
  SearchTree t(60);
  CHECK(t.size() == 1);
  CHECK(t.node(t.root()).clade_success == 0);
  CHECK(t.node(t.root()).clade_failure == 0);
  CHECK(t.node(t.root()).remaining_tasks.size() == 60);
  CHECK_FALSE(t.node(t.root()).parent.has_value());

  SearchTree one(1);
  REQUIRE(one.node(one.root()).remaining_tasks.size() == 1);
  CHECK(one.node(one.root()).remaining_tasks[0].index == 0);

  CHECK(SearchTree(500).node(AgentId{0}).remaining_tasks.size() == 500);
  CHECK_THROWS_AS(SearchTree(0), ParameterError);
}

TEST_CASE("add_child") {
  SearchTree t(10);
  t.record_evaluation(t.root(), TaskId{0}, true);
  const AgentId c = t.add_child(t.root());
  CHECK(t.size() == 2);
  CHECK(c.index == 1);
  CHECK(t.node(c).clade_success == 0);
  CHECK(t.node(c).remaining_tasks.size() == 10);
  CHECK(t.node(t.root()).clade_success == 1);
  CHECK(t.node(t.root()).clade_failure == 0);
  CHECK_THROWS_AS(t.add_child(AgentId{7}), UsageError);

  SearchTree r(5);
  for (int i = 0; i < 5; ++i) r.add_child(r.root());
  REQUIRE(r.node(r.root()).children.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(r.node(r.root()).children[i].index == i + 1);
}

TEST_CASE("record_evaluation walks ancestors") {
  SearchTree t(4);
  const AgentId a = t.add_child(t.root());
  const AgentId b = t.add_child(a);
  t.record_evaluation(b, TaskId{2}, true);
  for (AgentId id : {t.root(), a, b}) CHECK(t.node(id).clade_success == 1);
  CHECK(t.node(b).n_success == 1);
  CHECK(t.node(a).n_success == 0);
  CHECK(t.node(t.root()).n_success == 0);
  CHECK(t.node(b).remaining_tasks.size() == 3);

  SearchTree s(3);
  s.record_evaluation(s.root(), TaskId{0}, false);
  CHECK(s.node(s.root()).n_success == 0);
  CHECK(s.node(s.root()).n_failure == 1);
  CHECK(s.node(s.root()).clade_failure == 1);
}

TEST_CASE("record_evaluation rejects repeats and unknown targets") {
  SearchTree t(3);
  t.record_evaluation(t.root(), TaskId{1}, true);
  CHECK_THROWS_AS(t.record_evaluation(t.root(), TaskId{1}, false), UsageError);
  CHECK_THROWS_AS(t.record_evaluation(t.root(), TaskId{3}, false), UsageError);
  CHECK_THROWS_AS(t.record_evaluation(AgentId{4}, TaskId{0}, false), UsageError);
  CHECK(t.total_evaluations() == 1);
}

TEST_CASE("pending tasks") {
  SearchTree t(3);
  t.reserve_task(t.root(), TaskId{1});
  CHECK(t.node(t.root()).pending_evals == 1);
  CHECK(t.node(t.root()).remaining_tasks.size() == 2);
  CHECK(t.pending_evals_total() == 1);
  CHECK_THROWS_AS(t.reserve_task(t.root(), TaskId{1}), UsageError);
  t.release_task(t.root(), TaskId{1});
  CHECK(t.node(t.root()).remaining_tasks.back().index == 1);
  t.reserve_task(t.root(), TaskId{1});
  t.record_evaluation(t.root(), TaskId{1}, true);
  CHECK(t.node(t.root()).pending_evals == 0);
  CHECK(t.pending_evals_total() == 0);
  CHECK_NOTHROW(t.check_invariants());
}

TEST_CASE("pending expansions") {
  SearchTree t(3);
  t.begin_expansion(t.root());
  CHECK(t.pending_expansions_total() == 1);
  const AgentId c = t.finish_expansion(t.root());
  CHECK(c.index == 1);
  CHECK(t.pending_expansions_total() == 0);
  t.begin_expansion(c);
  t.abort_expansion(c);
  CHECK(t.size() == 2);
  CHECK_THROWS_AS(t.finish_expansion(c), UsageError);
  CHECK_THROWS_AS(t.abort_expansion(t.root()), UsageError);
}

TEST_CASE("cmp_estimate") {
  SearchTree t(10);
  CHECK_FALSE(t.cmp_estimate(t.root()).has_value());
  for (std::size_t i = 0; i < 3; ++i) t.record_evaluation(t.root(), TaskId{i}, true);
  t.record_evaluation(t.root(), TaskId{3}, false);
  CHECK(*t.cmp_estimate(t.root()) == doctest::Approx(0.75));

  SearchTree u(10);
  const AgentId x = u.add_child(u.root());
  const AgentId y = u.add_child(u.root());
  for (std::size_t i = 0; i < 4; ++i) {
    u.record_evaluation(x, TaskId{i}, true);
    u.record_evaluation(y, TaskId{i}, false);
  }
  u.record_evaluation(u.root(), TaskId{0}, true);
  u.record_evaluation(u.root(), TaskId{1}, false);
  CHECK(*u.cmp_estimate(u.root()) == doctest::Approx(0.5));
}

TEST_CASE("clade_members") {
  SearchTree t(2);
  const AgentId a = t.add_child(t.root());
  const AgentId b = t.add_child(a);
  const AgentId c = t.add_child(t.root());
  CHECK(t.clade_members(b) == std::vector<AgentId>{b});
  CHECK(t.clade_members(a) == std::vector<AgentId>{a, b});
  CHECK(t.clade_members(t.root()).size() == 4);
  CHECK(t.in_clade(a, b));
  CHECK_FALSE(t.in_clade(a, c));
  CHECK(t.in_clade(c, c));
}

TEST_CASE("random add/evaluate sequences match brute-force subtree sums") {
  // 10^4 sequences of 200 events each over small task pools.
  for (std::uint64_t seq = 0; seq < 10000; ++seq) {
    RandomStream rng = RandomStream::keyed(11, StreamDomain::Test, seq);
    const std::size_t tasks = 1 + rng.index_below(8);
    SearchTree t(tasks);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::uint64_t calls = 0;
    for (int e = 0; e < 200; ++e) {
      if (rng.index_below(3) == 0) {
        t.add_child(AgentId{rng.index_below(t.size())});
        continue;
      }
      const AgentId a{rng.index_below(t.size())};
      const auto& pool = t.node(a).remaining_tasks;
      if (pool.empty()) continue;
      const TaskId task = pool[rng.index_below(pool.size())];
      REQUIRE(seen.emplace(a.index, task.index).second);
      t.record_evaluation(a, task, rng.index_below(2) == 0);
      ++calls;
    }
    bool ok = t.total_evaluations() == calls;
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto [s, f] = brute::subtree_counts(t, i);
      const AgentNode& n = t.node(AgentId{i});
      ok = ok && n.clade_success == s && n.clade_failure == f;
      ok = ok && n.evaluations() + n.remaining_tasks.size() + n.pending_evals == tasks;
      sum += n.evaluations();
    }
    ok = ok && sum == calls;
    const auto root_cmp = t.cmp_estimate(t.root());
    if (calls > 0) {
      std::uint64_t s = 0;
      for (const auto& n : t.nodes()) s += n.n_success;
      ok = ok && root_cmp && std::abs(*root_cmp - static_cast<double>(s) / calls) < 1e-15;
    }
    if (!ok) {
      FAIL("sequence " << seq << " diverged from brute force");
    }
    CHECK_NOTHROW(t.check_invariants());
  }
}

TEST_CASE("from_nodes validates counters") {
  SearchTree t(3);
  const AgentId a = t.add_child(t.root());
  t.record_evaluation(a, TaskId{0}, true);
  std::vector<AgentNode> nodes(t.nodes().begin(), t.nodes().end());
  CHECK_NOTHROW(SearchTree::from_nodes(3, nodes));
  nodes[0].clade_success = 0;
  CHECK_THROWS_AS(SearchTree::from_nodes(3, nodes), UsageError);
}
