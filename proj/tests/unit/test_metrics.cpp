#include <doctest.h>

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "hgm/errors.hpp"
#include "hgm/metrics/metrics.hpp"
#include "hgm/runtime/drivers.hpp"
#include "hgm/runtime/replay.hpp"

using namespace hgm;
using namespace hgm::metrics;

namespace {

void evals(SearchTree& t, AgentId a, int s, int f) {
  std::size_t task = t.node(a).evaluations();
  for (int i = 0; i < s; ++i) t.record_evaluation(a, TaskId{task++}, true);
  for (int i = 0; i < f; ++i) t.record_evaluation(a, TaskId{task++}, false);
}

// Parent map and per-agent outcome lists read straight from the log records.
struct RawLog {
  std::map<std::size_t, std::size_t> parent;
  std::map<std::size_t, std::vector<bool>> outcomes;

  bool descends(std::size_t node, std::size_t head) const {
    while (true) {
      if (node == head) return true;
      auto it = parent.find(node);
      if (it == parent.end()) return false;
      node = it->second;
    }
  }
};

RawLog raw_from(const runtime::EventLog& log) {
  RawLog raw;
  for (const auto& e : log.events()) {
    if (e.kind == runtime::EventKind::ExpandCommit) {
      raw.parent[e.payload.at("child").get<std::size_t>()] = e.payload.at("parent").get<std::size_t>();
    } else if (e.kind == runtime::EventKind::EvalCommit) {
      raw.outcomes[e.payload.at("agent").get<std::size_t>()].push_back(e.payload.at("success").get<bool>());
    }
  }
  return raw;
}

}  // namespace

TEST_CASE("empirical CMP") {
  SearchTree t(20);
  const AgentId a = t.add_child(t.root());
  const AgentId b = t.add_child(t.root());
  const AgentId c = t.add_child(a);
  CHECK_FALSE(empirical_cmp(t, c).has_value());
  CHECK_FALSE(empirical_cmp(t, t.root()).has_value());  // no descendant evaluated yet
  evals(t, a, 1, 1);
  evals(t, b, 7, 3);
  evals(t, t.root(), 9, 1);
  CHECK(*empirical_cmp(t, t.root()) == doctest::Approx(0.7));
  CHECK(*empirical_cmp_argmax(t, t.root()) == b);
  CHECK_FALSE(empirical_cmp(t, a).has_value());
  evals(t, c, 3, 7);
  CHECK(*empirical_cmp(t, a) == doctest::Approx(0.3));  // own 0.5 excluded
  evals(t, c, 4, 0);  // c now 7/14 = 0.5
  CHECK(*empirical_cmp(t, t.root()) == doctest::Approx(0.7));
}

TEST_CASE("adjusted prediction on the two-child fixture") {
  SearchTree t(20);
  const AgentId n = t.add_child(t.root());
  const AgentId x = t.add_child(n);
  const AgentId y = t.add_child(n);
  evals(t, n, 2, 2);
  evals(t, x, 4, 0);
  evals(t, y, 1, 3);
  const auto p = adjusted_cmp_prediction(t, n);
  REQUIRE(p.has_value());
  CHECK(p->successes == 1);
  CHECK(p->failures == 3);
  CHECK(p->value == doctest::Approx(0.25));
  CHECK(p->weight == 4.0);
  CHECK(*empirical_cmp(t, n) == 1.0);
}

TEST_CASE("adjusted prediction excludes the argmax subtree, not just the argmax") {
  SearchTree t(40);
  const AgentId n = t.root();
  const AgentId x = t.add_child(n);
  const AgentId x1 = t.add_child(x);
  const AgentId y = t.add_child(n);
  evals(t, n, 5, 5);
  evals(t, x, 1, 4);
  evals(t, x1, 9, 1);  // the maximizer sits one level down
  evals(t, y, 3, 3);
  const auto p = adjusted_cmp_prediction(t, n);
  REQUIRE(p.has_value());
  CHECK(p->successes == 3);
  CHECK(p->failures == 3);
}

TEST_CASE("adjusted prediction is undefined when exclusions leave nothing") {
  SearchTree t(20);
  const AgentId n = t.root();
  const AgentId x = t.add_child(n);
  const AgentId y = t.add_child(n);
  evals(t, n, 3, 1);
  evals(t, x, 2, 1);
  CHECK_FALSE(adjusted_cmp_prediction(t, n).has_value());
  (void)y;  // unevaluated sibling contributes nothing
  CHECK_FALSE(adjusted_cmp_prediction(t, x).has_value());  // no target
}

TEST_CASE("ties for the maximum resolve to the smallest id") {
  SearchTree t(20);
  const AgentId n = t.root();
  const AgentId x = t.add_child(n);
  const AgentId y = t.add_child(n);
  evals(t, y, 2, 0);
  evals(t, x, 1, 0);
  CHECK(*empirical_cmp_argmax(t, n) == x);
  const auto p = adjusted_cmp_prediction(t, n);
  REQUIRE(p.has_value());
  CHECK(p->successes == 2);
  CHECK(p->failures == 0);
}

TEST_CASE("adjusted prediction never reads excluded evaluations") {
  // Reconstruct each node's adjusted counts from the log's commit records with
  // the node's own and the excluded subtree's records deleted.
  runtime::RunConfig cfg;
  cfg.budget_B = 300;
  cfg.env = env::EnvConfig::mismatch();
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    const runtime::RunResult run = runtime::run_sequential(cfg);
    const RawLog raw = raw_from(run.log);
    std::map<std::size_t, double> mean;
    for (const auto& [agent, out] : raw.outcomes) {
      double s = 0;
      for (bool o : out) s += o;
      mean[agent] = s / static_cast<double>(out.size());
    }
    for (std::size_t node = 0; node < run.tree.size(); ++node) {
      std::optional<std::size_t> best;
      for (const auto& [agent, m] : mean) {
        if (agent == node || !raw.descends(agent, node)) continue;
        if (!best || m > mean.at(*best)) best = agent;  // map order: smallest id wins ties
      }
      const auto p = adjusted_cmp_prediction(run.tree, AgentId{node});
      if (!best) {
        CHECK_FALSE(p.has_value());
        continue;
      }
      std::size_t b_star = *best;
      while (raw.parent.at(b_star) != node) b_star = raw.parent.at(b_star);
      std::uint64_t s = 0, f = 0;
      for (const auto& [agent, out] : raw.outcomes) {
        if (agent == node || !raw.descends(agent, node) || raw.descends(agent, b_star)) continue;
        for (bool o : out) (o ? s : f) += 1;
      }
      if (s + f == 0) {
        CHECK_FALSE(p.has_value());
        continue;
      }
      REQUIRE(p.has_value());
      CHECK(p->successes == s);
      CHECK(p->failures == f);
      CHECK(p->weight == static_cast<double>(s + f));
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("baseline prediction is the node's own mean") {
  SearchTree t(20);
  const AgentId a = t.add_child(t.root());
  CHECK_FALSE(baseline_cmp_prediction(t, a).has_value());
  evals(t, a, 6, 4);
  evals(t, t.root(), 1, 1);
  const auto p = baseline_cmp_prediction(t, a);
  REQUIRE(p.has_value());
  CHECK(p->value == doctest::Approx(0.6));
  CHECK(p->weight == 10.0);
  // Root: own counts only, never aggregated over the clade.
  CHECK(baseline_cmp_prediction(t, t.root())->value == 0.5);
}

TEST_CASE("pearson examples") {
  const std::vector<double> x{0, 1, 2, 3.5, 7};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  CHECK(*pearson(x, y) == doctest::Approx(1.0));
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  CHECK(*pearson(x, neg) == doctest::Approx(-1.0));
  const std::vector<double> ramp{0, 1, 2}, tent{0, 1, 0};
  CHECK(std::abs(*pearson(ramp, tent)) <= 1e-15);
  CHECK_FALSE(pearson(ramp, std::vector<double>{4, 4, 4}).has_value());
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), ParameterError);
  CHECK_THROWS_AS(pearson(ramp, x), ParameterError);
  CHECK_THROWS_AS(pearson(ramp, tent, std::vector<double>{1, -1, 1}), ParameterError);
  CHECK_THROWS_AS(pearson(ramp, tent, std::vector<double>{0, 0, 0}), ParameterError);
}

TEST_CASE("weighted pearson equals the unweighted value on repeated points") {
  const std::vector<double> x{0.1, 0.4, 0.35, 0.9}, y{0.2, 0.1, 0.6, 0.8}, w{1, 3, 2, 1};
  std::vector<double> xr, yr;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < static_cast<int>(w[i]); ++k) {
      xr.push_back(x[i]);
      yr.push_back(y[i]);
    }
  }
  CHECK(*pearson(x, y, w) == doctest::Approx(*pearson(xr, yr)).epsilon(1e-13));
  // A zero weight drops the point.
  const std::vector<double> x3{0.1, 0.4, 0.35, 5.0}, w3{1, 3, 2, 0};
  CHECK(*pearson(x3, y, w3) == doctest::Approx(*pearson(std::vector<double>{0.1, 0.4, 0.35},
                                                         std::vector<double>{0.2, 0.1, 0.6},
                                                         std::vector<double>{1, 3, 2}))
                                   .epsilon(1e-13));
}

TEST_CASE("pearson is invariant under sign-preserving affine maps") {
  RandomStream rng = RandomStream::keyed(1, StreamDomain::Test, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.index_below(20);
    std::vector<double> x, y, w, xa, ya;
    const double a = 0.01 + 10 * rng.uniform_open(), b = 20 * rng.uniform_open() - 10;
    const double c = 0.01 + 10 * rng.uniform_open(), d = 20 * rng.uniform_open() - 10;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(rng.uniform_open());
      y.push_back(x.back() + rng.normal());
      w.push_back(rng.uniform_open());
      xa.push_back(a * x.back() + b);
      ya.push_back(c * y.back() + d);
    }
    const double r = *pearson(x, y, w);
    CHECK(std::abs(r) <= 1.0);
    CHECK(*pearson(xa, ya, w) == doctest::Approx(r).epsilon(1e-9));
    for (auto& v : ya) v = -v;
    CHECK(*pearson(xa, ya, w) == doctest::Approx(-r).epsilon(1e-9));
  }
}

TEST_CASE("correlation report") {
  CHECK(estimator_for(policy::PolicyKind::HGM) == Estimator::AdjustedClade);
  CHECK(estimator_for(policy::PolicyKind::Greedy) == Estimator::OwnMean);
  CHECK(estimator_for(policy::PolicyKind::DGMLike) == Estimator::OwnMean);

  SearchTree t(20);
  const CorrelationReport empty = correlation_report(t, Estimator::AdjustedClade);
  CHECK(empty.n_used() == 0);
  CHECK_FALSE(empty.weighted_r.has_value());

  runtime::RunConfig cfg;
  cfg.budget_B = 400;
  cfg.env = env::EnvConfig::mismatch();
  const runtime::RunResult run = runtime::run_sequential(cfg, false);
  for (auto est : {Estimator::AdjustedClade, Estimator::OwnMean}) {
    const CorrelationReport r = correlation_report(run.tree, est);
    CHECK(r.n_used() <= run.tree.size());
    REQUIRE(r.n_used() >= 2);
    std::vector<double> xs, ys, ws;
    for (const auto& p : r.pairs) {
      CHECK(*empirical_cmp(run.tree, p.node) == p.target);
      const auto pred = est == Estimator::AdjustedClade ? adjusted_cmp_prediction(run.tree, p.node)
                                                        : baseline_cmp_prediction(run.tree, p.node);
      CHECK(pred->value == p.prediction);
      CHECK(pred->weight == p.weight);
      xs.push_back(p.prediction);
      ys.push_back(p.target);
      ws.push_back(p.weight);
    }
    CHECK(r.weighted_r == pearson(xs, ys, ws));
    CHECK(r.unweighted_r == pearson(xs, ys));
  }
}
