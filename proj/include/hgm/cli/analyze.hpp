#pragma once

#include <string>
#include <vector>

#include "hgm/cli/csv.hpp"
#include "hgm/metrics/metrics.hpp"
#include "hgm/runtime/events.hpp"
#include "hgm/runtime/run_config.hpp"

namespace hgm::cli {

struct AnalyzedRun {
  std::string source;
  runtime::RunConfig config;
  metrics::CorrelationReport report;
};

// Rebuilds the final tree from the log and correlates the estimator that the
// logged policy actually uses against empirical CMP. Throws ParseError on
// logs from another schema version.
AnalyzedRun analyze_log(const runtime::EventLog& log, std::string source);

// One "run" row per input, then per policy a "mean" row (average of per-run
// weighted/unweighted r over runs where it is defined) and a "pooled" row
// (correlation over the concatenated pairs).
// Columns: scope,source,policy,seed,estimator,n_used,weighted_r,unweighted_r,runs,flag
CsvTable correlation_table(const std::vector<AnalyzedRun>& runs);

// Columns: source,policy,seed,node,prediction,target,weight
CsvTable pairs_table(const std::vector<AnalyzedRun>& runs);

// Fixed-width rendering of correlation_table for terminals.
std::string render_table(const CsvTable& table);

}  // namespace hgm::cli
