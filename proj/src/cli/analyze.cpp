#include "hgm/cli/analyze.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "hgm/runtime/replay.hpp"

namespace hgm::cli {

AnalyzedRun analyze_log(const runtime::EventLog& log, std::string source) {
  AnalyzedRun out;
  out.source = std::move(source);
  out.config = runtime::logged_config(log);
  const SearchTree tree = runtime::rebuild_tree(log);
  out.report = metrics::correlation_report(tree, metrics::estimator_for(out.config.policy_kind));
  return out;
}

namespace {

std::string flag_for(const metrics::CorrelationReport& r) {
  if (r.n_used() == 0) return "no_pairs";
  if (!r.weighted_r || !r.unweighted_r) return "undefined_r";
  return "";
}

std::optional<double> mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

CsvTable correlation_table(const std::vector<AnalyzedRun>& runs) {
  CsvTable t;
  t.header = {"scope", "source", "policy", "seed", "estimator", "n_used", "weighted_r", "unweighted_r", "runs", "flag"};
  struct Group {
    metrics::Estimator estimator = metrics::Estimator::AdjustedClade;
    std::vector<double> weighted, unweighted;
    metrics::CorrelationReport pooled;
    std::size_t runs = 0;
  };
  std::map<std::string, Group> groups;
  std::vector<std::string> order;
  for (const AnalyzedRun& run : runs) {
    const std::string policy(policy::to_string(run.config.policy_kind));
    t.rows.push_back({"run", run.source, policy, std::to_string(run.config.seed),
                      metrics::to_string(run.report.estimator), std::to_string(run.report.n_used()),
                      format_optional(run.report.weighted_r), format_optional(run.report.unweighted_r), "1",
                      flag_for(run.report)});
    if (!groups.count(policy)) order.push_back(policy);
    Group& g = groups[policy];
    g.estimator = run.report.estimator;
    ++g.runs;
    if (run.report.weighted_r) g.weighted.push_back(*run.report.weighted_r);
    if (run.report.unweighted_r) g.unweighted.push_back(*run.report.unweighted_r);
    g.pooled.pairs.insert(g.pooled.pairs.end(), run.report.pairs.begin(), run.report.pairs.end());
  }
  for (const std::string& policy : order) {
    Group& g = groups[policy];
    t.rows.push_back({"mean", "", policy, "", metrics::to_string(g.estimator), std::to_string(g.weighted.size()),
                      format_optional(mean_of(g.weighted)), format_optional(mean_of(g.unweighted)),
                      std::to_string(g.runs), g.weighted.empty() ? "no_defined_r" : ""});
    if (g.pooled.pairs.size() >= 2) {
      std::vector<double> xs, ys, ws;
      for (const auto& p : g.pooled.pairs) {
        xs.push_back(p.prediction);
        ys.push_back(p.target);
        ws.push_back(p.weight);
      }
      g.pooled.weighted_r = metrics::pearson(xs, ys, ws);
      g.pooled.unweighted_r = metrics::pearson(xs, ys);
    }
    t.rows.push_back({"pooled", "", policy, "", metrics::to_string(g.estimator),
                      std::to_string(g.pooled.n_used()), format_optional(g.pooled.weighted_r),
                      format_optional(g.pooled.unweighted_r), std::to_string(g.runs), flag_for(g.pooled)});
  }
  return t;
}

CsvTable pairs_table(const std::vector<AnalyzedRun>& runs) {
  CsvTable t;
  t.header = {"source", "policy", "seed", "node", "prediction", "target", "weight"};
  for (const AnalyzedRun& run : runs) {
    for (const auto& p : run.report.pairs) {
      t.rows.push_back({run.source, std::string(policy::to_string(run.config.policy_kind)),
                        std::to_string(run.config.seed), std::to_string(p.node.index), format_real(p.prediction),
                        format_real(p.target), format_real(p.weight)});
    }
  }
  return t;
}

std::string render_table(const CsvTable& table) {
  std::vector<std::size_t> width(table.header.size());
  for (std::size_t c = 0; c < width.size(); ++c) {
    width[c] = table.header[c].size();
    for (const auto& row : table.rows) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << std::string(width[c] - row[c].size() + (c + 1 < row.size() ? 2 : 0), ' ');
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out.str();
}

}  // namespace hgm::cli
