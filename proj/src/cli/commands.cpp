#include "hgm/cli/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hgm/cli/analyze.hpp"
#include "hgm/cli/sweep.hpp"
#include "hgm/errors.hpp"
#include "hgm/godel/micro_mdp.hpp"
#include "hgm/runtime/replay.hpp"
#include "hgm/runtime/snapshot.hpp"

namespace hgm::cli {

namespace {

runtime::RunConfig resolve_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config " + path.string());
  runtime::Json doc;
  try {
    doc = runtime::Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("config " + path.string() + ": " + e.what());
  }
  runtime::apply_overrides(doc, overrides);
  runtime::RunConfig cfg = runtime::run_config_from_json(doc, path.parent_path());
  cfg.validate();
  return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << content;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  try {
    const auto colon = text.find(':');
    std::size_t used = 0;
    if (colon == std::string::npos) {
      const std::uint64_t n = std::stoull(text, &used);
      if (used != text.size()) throw ParameterError("");
      return {0, n};
    }
    const std::string a = text.substr(0, colon);
    const std::string b = text.substr(colon + 1);
    const std::uint64_t lo = std::stoull(a, &used);
    if (used != a.size()) throw ParameterError("");
    const std::uint64_t hi = std::stoull(b, &used);
    if (used != b.size()) throw ParameterError("");
    if (hi <= lo) throw ParameterError("");
    return {lo, hi};
  } catch (const std::exception&) {
    throw ParameterError("seed range must be N or A:B with A < B, got '" + text + "'");
  }
}

int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err) {
  runtime::RunConfig cfg;
  try {
    cfg = resolve_config(cmd.config, cmd.overrides);
  } catch (const ParameterError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitUsage;
  }
  const auto start = std::chrono::steady_clock::now();
  const std::string started_at = utc_timestamp();
  runtime::RunResult result = cfg.workers > 1 ? runtime::run_async(cfg) : runtime::run_sequential(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const RunSummary summary = summarize(cfg, result, default_run_id(cfg), wall);

  std::filesystem::create_directories(cmd.out_dir);
  write_file(cmd.out_dir / "events.ndjson", result.log.str());
  runtime::Snapshot snap{cfg, {result.tree, result.latents}, 0};
  for (const auto& e : result.log.events()) {
    if (e.kind == runtime::EventKind::Decision) snap.next_action_seq = e.payload.at("action").get<std::uint64_t>() + 1;
  }
  write_file(cmd.out_dir / "tree.json", runtime::to_json(snap).dump(1) + "\n");
  write_file(cmd.out_dir / "summary.json", to_json(summary).dump(2) + "\n");
  runtime::Json meta;
  meta["started_at"] = started_at;
  meta["wall_time_s"] = wall;
  meta["simulated_latency_ms"] = result.simulated_latency_ms;
  meta["workers"] = cfg.workers;
  write_file(cmd.out_dir / "meta.json", meta.dump(2) + "\n");

  out << summary.run_id << ": best-belief agent " << summary.best_belief.index << " (true utility "
      << summary.best_belief_true_utility << "), " << summary.tree_size << " agents, " << summary.evaluations
      << " evaluations" << (summary.completed ? "" : " [incomplete]") << '\n';
  return kExitOk;
}

int cmd_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err) {
  SweepOptions opts;
  try {
    opts.base = resolve_config(cmd.config, cmd.overrides);
    for (const auto& p : cmd.policies) opts.policies.push_back(policy::policy_kind_from_string(p));
    if (opts.policies.empty()) opts.policies.push_back(opts.base.policy_kind);
    if (cmd.seed_end <= cmd.seed_begin) throw ParameterError("seed range is empty");
  } catch (const ParameterError& e) {
    err << "invalid sweep: " << e.what() << '\n';
    return kExitUsage;
  }
  opts.seed_begin = cmd.seed_begin;
  opts.seed_end = cmd.seed_end;
  opts.resamples = cmd.resamples;
  const SweepResult result = run_sweep(opts);
  const CsvTable table = sweep_table(result);
  if (!cmd.out_csv.empty()) {
    if (cmd.out_csv.has_parent_path()) std::filesystem::create_directories(cmd.out_csv.parent_path());
    write_file(cmd.out_csv, to_csv(table));
  }
  CsvTable brief;
  brief.header = {"row_type", "policy", "n", "mean", "ci_low", "ci_high", "failures"};
  for (const auto& a : result.aggregates) {
    brief.rows.push_back({a.kind, a.label, std::to_string(a.ci.n), format_real(a.ci.mean), format_real(a.ci.low),
                          format_real(a.ci.high), std::to_string(a.failures)});
  }
  out << render_table(brief);
  return kExitOk;
}

int cmd_analyze(const AnalyzeCommand& cmd, std::ostream& out, std::ostream& err) {
  if (cmd.logs.empty()) {
    err << "analyze needs at least one log\n";
    return kExitUsage;
  }
  std::vector<AnalyzedRun> runs;
  for (const auto& path : cmd.logs) {
    try {
      runs.push_back(analyze_log(runtime::EventLog::read_file(path.string()), path.string()));
    } catch (const ParseError& e) {
      err << path.string() << ": " << e.what() << '\n';
      return kExitUsage;
    } catch (const ParameterError& e) {
      err << path.string() << ": " << e.what() << '\n';
      return kExitUsage;
    }
  }
  const CsvTable table = correlation_table(runs);
  if (!cmd.out_dir.empty()) {
    std::filesystem::create_directories(cmd.out_dir);
    write_file(cmd.out_dir / "correlations.csv", to_csv(table));
    write_file(cmd.out_dir / "pairs.csv", to_csv(pairs_table(runs)));
  }
  out << render_table(table);
  return kExitOk;
}

int cmd_oracle_check(const OracleCheckCommand& cmd, std::ostream& out, std::ostream& err) {
  std::vector<godel::MicroMDP> instances;
  try {
    if (cmd.instances) instances = godel::load_instances(*cmd.instances);
    if (cmd.random > 0) {
      RandomStream rng(cmd.seed);
      for (std::size_t i = 0; i < cmd.random; ++i) {
        godel::MicroMDP mdp = godel::random_micro_mdp(rng, cmd.max_types, cmd.max_budget);
        mdp.name = "random_" + std::to_string(i);
        instances.push_back(std::move(mdp));
      }
    }
  } catch (const std::exception& e) {
    err << "oracle-check: " << e.what() << '\n';
    return kExitUsage;
  }
  if (instances.empty()) {
    err << "oracle-check: no instances (use --instances or --random)\n";
    return kExitUsage;
  }
  godel::VerifyOptions options;
  options.cmp_fault = cmd.inject_cmp_fault;
  options.max_trajectories = cmd.max_trajectories;

  const auto start = std::chrono::steady_clock::now();
  std::size_t passed = 0, failed = 0, skipped = 0, pairs = 0;
  double worst = 0.0;
  runtime::Json report = runtime::Json::array();
  for (const auto& mdp : instances) {
    runtime::Json entry;
    entry["name"] = mdp.name;
    try {
      const godel::TheoremReport r = godel::verify_theorem(mdp, options);
      pairs += r.pairs_checked;
      worst = std::max(worst, r.max_abs_gap);
      entry["passed"] = r.passed;
      entry["states"] = r.states_checked;
      entry["pairs"] = r.pairs_checked;
      entry["max_abs_gap"] = r.max_abs_gap;
      runtime::Json violations = runtime::Json::array();
      for (const auto& v : r.violations) {
        violations.push_back({{"parent_type", v.state.parent_type},
                              {"child_type", v.state.child_type},
                              {"remaining_budget", v.state.remaining_budget},
                              {"action", v.action ? godel::to_string(*v.action) : "decision"},
                              {"what", v.what},
                              {"cmp", v.cmp},
                              {"q", v.q}});
        out << mdp.name << ": state (" << v.state.parent_type << ", " << v.state.child_type << ", "
            << v.state.remaining_budget << ")"
            << (v.action ? std::string(" ") + godel::to_string(*v.action) : std::string()) << ": " << v.what
            << " (cmp " << v.cmp << ", q " << v.q << ")\n";
      }
      entry["violations"] = violations;
      r.passed ? ++passed : ++failed;
    } catch (const CapacityError& e) {
      ++skipped;
      entry["skipped"] = e.what();
      out << mdp.name << ": skipped, " << e.what() << '\n';
    } catch (const ParameterError& e) {
      err << mdp.name << ": " << e.what() << '\n';
      return kExitUsage;
    }
    report.push_back(std::move(entry));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << "oracle-check: " << passed << " passed, " << failed << " failed, " << skipped << " skipped; " << pairs
      << " (state, action) pairs, max |cmp - q| = " << worst << ", " << std::fixed << std::setprecision(2) << secs
      << " s\n";
  if (cmd.report) write_file(*cmd.report, report.dump(2) + "\n");
  if (failed > 0) return kExitVerification;
  if (skipped > 0) return kExitCapacity;
  return kExitOk;
}

int cmd_replay(const ReplayCommand& cmd, std::ostream& out, std::ostream& err) {
  runtime::ReplayReport report;
  try {
    report = runtime::replay(runtime::EventLog::read_file(cmd.log.string()));
  } catch (const ParseError& e) {
    err << cmd.log.string() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << cmd.log.string() << ": " << e.what() << '\n';
    return kExitUsage;
  }
  if (!report.ok()) {
    out << "divergence at seq " << report.divergence->seq << ": " << report.divergence->message << '\n';
    return kExitVerification;
  }
  out << "replay ok: " << report.events << " events, " << report.decisions << " decisions, " << report.eval_commits
      << " evaluations" << (report.completed ? ", completed" : "") << (report.starved ? ", starved" : "") << '\n';
  return kExitOk;
}

}  // namespace hgm::cli
