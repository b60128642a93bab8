#include <iostream>

#include <CLI11.hpp>

#include "hgm/cli/commands.hpp"
#include "hgm/errors.hpp"

using namespace hgm::cli;

int main(int argc, char** argv) {
  CLI::App app{"Clade-metaproductivity tree search: run, sweep, analyze and verify"};
  app.require_subcommand(1);

  RunCommand run;
  auto* run_cmd = app.add_subcommand("run", "Execute one search run");
  run_cmd->add_option("-c,--config", run.config, "Run configuration (JSON)")->required();
  run_cmd->add_option("-o,--out", run.out_dir, "Output directory")->required();
  run_cmd->allow_extras();
  run_cmd->footer("Any other --key value pair overrides a config field, e.g. --seed 3 --env.sigma_u 0.1");

  SweepCommand sweep;
  std::string seeds = "10";
  std::string policies;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a policy set over a seed range");
  sweep_cmd->add_option("-c,--config", sweep.config, "Run configuration (JSON)")->required();
  sweep_cmd->add_option("--seeds", seeds, "N or A:B (half-open)");
  sweep_cmd->add_option("--policies", policies, "Comma separated: hgm,greedy,dgm_like");
  sweep_cmd->add_option("--resamples", sweep.resamples, "Bootstrap resamples");
  sweep_cmd->add_option("-o,--out", sweep.out_csv, "CSV output path");
  sweep_cmd->allow_extras();

  AnalyzeCommand analyze;
  std::vector<std::string> logs;
  auto* analyze_cmd = app.add_subcommand("analyze", "Correlate CMP estimators with empirical CMP");
  analyze_cmd->add_option("logs", logs, "Event logs")->required();
  analyze_cmd->add_option("-o,--out", analyze.out_dir, "Directory for correlations.csv and pairs.csv");

  OracleCheckCommand oracle;
  std::string instances, report;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Check CMP against Q-values on micro MDPs");
  oracle_cmd->add_option("--instances", instances, "Instance file (JSON)");
  oracle_cmd->add_option("--random", oracle.random, "Number of random instances");
  oracle_cmd->add_option("--max-types", oracle.max_types, "Largest random type count (<= 5)");
  oracle_cmd->add_option("--max-budget", oracle.max_budget, "Largest random budget (<= 4)");
  oracle_cmd->add_option("--seed", oracle.seed, "Seed for random instances");
  oracle_cmd->add_option("--inject-cmp-fault", oracle.inject_cmp_fault, "Bias added to the child's CMP");
  oracle_cmd->add_option("--max-trajectories", oracle.max_trajectories, "Enumeration limit per evaluation");
  oracle_cmd->add_option("--report", report, "Write a JSON report");

  hgm::cli::ReplayCommand replay;
  std::string replay_log;
  auto* replay_cmd = app.add_subcommand("replay", "Re-derive every decision and outcome of a log");
  replay_cmd->add_option("log", replay_log, "Event log")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) {
      run.overrides = run_cmd->remaining();
      return cmd_run(run, std::cout, std::cerr);
    }
    if (sweep_cmd->parsed()) {
      sweep.overrides = sweep_cmd->remaining();
      std::tie(sweep.seed_begin, sweep.seed_end) = parse_seed_range(seeds);
      std::size_t start = 0;
      while (start < policies.size()) {
        const auto comma = policies.find(',', start);
        const auto end = comma == std::string::npos ? policies.size() : comma;
        if (end > start) sweep.policies.push_back(policies.substr(start, end - start));
        start = end + 1;
      }
      return cmd_sweep(sweep, std::cout, std::cerr);
    }
    if (analyze_cmd->parsed()) {
      analyze.logs.assign(logs.begin(), logs.end());
      return cmd_analyze(analyze, std::cout, std::cerr);
    }
    if (oracle_cmd->parsed()) {
      if (!instances.empty()) oracle.instances = instances;
      if (!report.empty()) oracle.report = report;
      return cmd_oracle_check(oracle, std::cout, std::cerr);
    }
    if (replay_cmd->parsed()) {
      replay.log = replay_log;
      return cmd_replay(replay, std::cout, std::cerr);
    }
  } catch (const hgm::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const hgm::CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
