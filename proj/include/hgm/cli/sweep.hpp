#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgm/cli/csv.hpp"
#include "hgm/cli/summary.hpp"

namespace hgm::cli {

struct SweepOptions {
  runtime::RunConfig base;
  std::vector<policy::PolicyKind> policies;
  std::uint64_t seed_begin = 0;
  std::uint64_t seed_end = 0;  // exclusive
  std::size_t resamples = 10000;
};

struct SweepRow {
  RunSummary summary;
  std::string error;  // non-empty when the run threw
};

struct AggregateRow {
  std::string kind;   // "aggregate" or "paired_diff"
  std::string label;  // policy name, or "<a>-<b>" for paired differences
  Interval ci;        // over best-belief true utility
  std::size_t failures = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<AggregateRow> aggregates;
};

// Every (policy, seed) pair is run; failures are kept as rows. Paired
// differences compare the first policy with each other one on the seeds where
// both completed.
SweepResult run_sweep(const SweepOptions& options);

// Columns: row_type,run_id,policy,seed,best_belief,true_utility,empirical_mean,
// tree_size,evaluations,completed,n,mean,ci_low,ci_high,failures,error
CsvTable sweep_table(const SweepResult& result);

}  // namespace hgm::cli
