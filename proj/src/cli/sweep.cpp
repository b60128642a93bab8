#include "hgm/cli/sweep.hpp"

#include <chrono>
#include <map>

#include "hgm/errors.hpp"

namespace hgm::cli {

namespace {

runtime::RunResult execute(const runtime::RunConfig& cfg) {
  return cfg.workers > 1 ? runtime::run_async(cfg) : runtime::run_sequential(cfg, false);
}

}  // namespace

SweepResult run_sweep(const SweepOptions& options) {
  if (options.policies.empty()) throw ParameterError("sweep needs at least one policy");
  if (options.seed_end <= options.seed_begin) throw ParameterError("sweep seed range is empty");
  SweepResult result;
  std::map<std::uint64_t, std::map<std::size_t, double>> utility_by_seed;
  for (std::size_t p = 0; p < options.policies.size(); ++p) {
    std::vector<double> utilities;
    std::size_t failures = 0;
    for (std::uint64_t seed = options.seed_begin; seed < options.seed_end; ++seed) {
      runtime::RunConfig cfg = options.base;
      cfg.seed = seed;
      cfg.policy_kind = options.policies[p];
      SweepRow row;
      row.summary.run_id = default_run_id(cfg);
      row.summary.policy_kind = cfg.policy_kind;
      row.summary.seed = seed;
      try {
        cfg.validate();
        const auto start = std::chrono::steady_clock::now();
        const runtime::RunResult run = execute(cfg);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        row.summary = summarize(cfg, run, row.summary.run_id, wall);
        if (!run.completed) row.error = "run ended before the budget was spent";
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      if (row.error.empty()) {
        utilities.push_back(row.summary.best_belief_true_utility);
        utility_by_seed[seed][p] = row.summary.best_belief_true_utility;
      } else {
        ++failures;
      }
      result.rows.push_back(std::move(row));
    }
    AggregateRow agg{"aggregate", std::string(policy::to_string(options.policies[p])), {}, failures};
    if (!utilities.empty()) agg.ci = bootstrap_mean_ci(utilities, options.resamples, 0.95, options.seed_begin);
    result.aggregates.push_back(agg);
  }
  for (std::size_t p = 1; p < options.policies.size(); ++p) {
    std::vector<double> diffs;
    for (const auto& [seed, by_policy] : utility_by_seed) {
      if (by_policy.count(0) && by_policy.count(p)) diffs.push_back(by_policy.at(0) - by_policy.at(p));
    }
    AggregateRow paired{"paired_diff",
                        std::string(policy::to_string(options.policies[0])) + "-" +
                            std::string(policy::to_string(options.policies[p])),
                        {},
                        static_cast<std::size_t>(options.seed_end - options.seed_begin) - diffs.size()};
    if (!diffs.empty()) paired.ci = bootstrap_mean_ci(diffs, options.resamples, 0.95, options.seed_begin);
    result.aggregates.push_back(paired);
  }
  return result;
}

CsvTable sweep_table(const SweepResult& result) {
  CsvTable t;
  t.header = {"row_type", "run_id",      "policy", "seed", "best_belief", "true_utility",
              "empirical_mean", "tree_size", "evaluations", "completed", "n", "mean",
              "ci_low",   "ci_high",     "failures", "error"};
  for (const SweepRow& r : result.rows) {
    const RunSummary& s = r.summary;
    const bool ok = r.error.empty() || s.evaluations > 0;
    t.rows.push_back({"run", s.run_id, std::string(policy::to_string(s.policy_kind)), std::to_string(s.seed),
                      ok ? std::to_string(s.best_belief.index) : "", ok ? format_real(s.best_belief_true_utility) : "",
                      format_optional(s.best_belief_empirical_mean), ok ? std::to_string(s.tree_size) : "",
                      ok ? std::to_string(s.evaluations) : "", s.completed ? "true" : "false", "", "", "", "", "",
                      r.error});
  }
  for (const AggregateRow& a : result.aggregates) {
    const bool has = a.ci.n > 0;
    t.rows.push_back({a.kind, "", a.label, "", "", "", "", "", "", "", std::to_string(a.ci.n),
                      has ? format_real(a.ci.mean) : "", has ? format_real(a.ci.low) : "",
                      has ? format_real(a.ci.high) : "", std::to_string(a.failures), ""});
  }
  return t;
}

}  // namespace hgm::cli
