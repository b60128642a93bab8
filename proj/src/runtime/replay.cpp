#include "hgm/runtime/replay.hpp"

#include "hgm/env/executor.hpp"
#include "hgm/errors.hpp"
#include "hgm/runtime/coordinator.hpp"

namespace hgm::runtime {

namespace {

const RunEvent& header(const EventLog& log) {
  if (log.events().empty() || log.events().front().kind != EventKind::RunStart) {
    throw ParseError(1, "event log must start with a RunStart record");
  }
  const RunEvent& first = log.events().front();
  const Json& schema = first.payload.contains("schema") ? first.payload.at("schema") : Json();
  if (!schema.is_number_integer() || schema.get<int>() != kEventSchemaVersion) {
    throw ParseError(1, "unsupported event schema " + schema.dump() + " (this build reads version " +
                            std::to_string(kEventSchemaVersion) + ")");
  }
  return first;
}

class Replayer {
 public:
  explicit Replayer(const EventLog& log)
      : log_(log),
        cfg_(logged_config(log)),
        executor_(quiet_env(cfg_.env), cfg_.seed),
        coord_(cfg_, regenerated_, executor_.root()) {}

  ReplayReport run() {
    const auto& events = log_.events();
    report_.events = events.size();
    coord_.log_run_start();
    if (!match(0)) return report_;
    std::size_t i = 1;
    while (i < events.size() && report_.ok()) {
      const RunEvent& e = events[i];
      const std::size_t before = regenerated_.events().size();
      try {
        switch (e.kind) {
          case EventKind::Decision:
            ++report_.decisions;
            if (!coord_.next_dispatch()) {
              diverge(e.seq, "replayed policy does not dispatch an action here");
              return report_;
            }
            break;
          case EventKind::ExpandCommit:
          case EventKind::EvalCommit:
          case EventKind::ActionFailed:
            if (!commit(e)) return report_;
            break;
          case EventKind::ActionDiscarded:
            coord_.discard_inflight();
            break;
          case EventKind::Starved:
            report_.starved = true;
            coord_.mark_starved();
            break;
          case EventKind::FinalSelection:
            coord_.finalize();
            report_.finished = true;
            break;
          default:
            diverge(e.seq, "unexpected " + std::string(to_string(e.kind)) + " record");
            return report_;
        }
      } catch (const std::exception& ex) {
        diverge(e.seq, std::string("replay rejected record: ") + ex.what());
        return report_;
      }
      const std::size_t produced = regenerated_.events().size() - before;
      if (produced == 0) {
        diverge(e.seq, "record has no counterpart in the replay");
        return report_;
      }
      for (std::size_t k = 0; k < produced; ++k) {
        if (!match(i + k)) return report_;
      }
      i += produced;
    }
    if (report_.ok()) {
      const std::uint64_t last = events.empty() ? 0 : events.back().seq;
      try {
        coord_.tree().check_invariants();
      } catch (const std::exception& ex) {
        diverge(last, ex.what());
        return report_;
      }
      if (coord_.budget().allocated() > cfg_.budget_B) diverge(last, "budget overrun");
      report_.completed = report_.finished && report_.eval_commits == cfg_.budget_B;
      if (report_.finished && !report_.starved && !report_.completed) {
        diverge(last, "finished run does not hold exactly budget_B evaluations");
      }
    }
    return report_;
  }

 private:
  static env::EnvConfig quiet_env(env::EnvConfig env) {
    env.latency_constant_ms = 0.0;
    env.latency_exp_mean_ms = 0.0;
    return env;
  }

  bool commit(const RunEvent& e) {
    Completion c;
    c.action_seq = e.payload.at("action").get<std::uint64_t>();
    const std::optional<policy::Action> action = coord_.inflight_action(c.action_seq);
    if (!action) {
      diverge(e.seq, "commit for an action that is not in flight");
      return false;
    }
    const env::AgentHandle handle = coord_.handle_of(action->agent);
    if (e.kind == EventKind::ActionFailed) {
      c.failed = true;
    } else if (e.kind == EventKind::ExpandCommit) {
      if (action->kind != policy::ActionKind::Expand) {
        diverge(e.seq, "expansion commit for an evaluation action");
        return false;
      }
      c.child = executor_.expand(handle, c.action_seq);
    } else {
      if (action->kind != policy::ActionKind::Evaluate) {
        diverge(e.seq, "evaluation commit for an expansion action");
        return false;
      }
      c.success = e.payload.at("success").get<bool>();
      const bool expected = executor_.evaluate(handle, *action->task, c.action_seq);
      if (expected != c.success) {
        diverge(e.seq, "logged outcome differs from the environment re-simulation");
        return false;
      }
      ++report_.eval_commits;
    }
    coord_.complete(c);
    return true;
  }

  bool match(std::size_t index) {
    const auto& logged = log_.events();
    const auto& mine = regenerated_.events();
    if (index >= logged.size()) {
      diverge(mine[index].seq, "log ends before " + std::string(to_string(mine[index].kind)));
      return false;
    }
    const std::string want = to_line(mine[index]);
    const std::string have = to_line(logged[index]);
    if (want != have) {
      diverge(logged[index].seq, "expected " + want + " but log has " + have);
      return false;
    }
    return true;
  }

  void diverge(std::uint64_t seq, std::string message) {
    if (!report_.divergence) report_.divergence = Divergence{seq, std::move(message)};
  }

  const EventLog& log_;
  RunConfig cfg_;
  env::SyntheticExecutor executor_;
  EventLog regenerated_;
  Coordinator coord_;
  ReplayReport report_;
};

}  // namespace

RunConfig logged_config(const EventLog& log) {
  const RunEvent& first = header(log);
  if (!first.payload.contains("config")) throw ParseError(1, "RunStart record has no config");
  try {
    return run_config_from_json(first.payload.at("config"));
  } catch (const ParameterError& e) {
    throw ParseError(1, e.what());
  }
}

ReplayReport replay(const EventLog& log) {
  Replayer replayer(log);
  return replayer.run();
}

SearchTree rebuild_tree(const EventLog& log) {
  const RunConfig cfg = logged_config(log);
  SearchTree tree(cfg.env.task_count);
  std::size_t line = 0;
  for (const RunEvent& e : log.events()) {
    ++line;
    try {
      if (e.kind == EventKind::ExpandCommit) {
        const AgentId child = tree.add_child(AgentId{e.payload.at("parent").get<std::size_t>()});
        if (child.index != e.payload.at("child").get<std::size_t>()) {
          throw ParseError(line, "child id out of creation order");
        }
      } else if (e.kind == EventKind::EvalCommit) {
        tree.record_evaluation(AgentId{e.payload.at("agent").get<std::size_t>()},
                               TaskId{e.payload.at("task").get<std::size_t>()},
                               e.payload.at("success").get<bool>());
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ParseError(line, ex.what());
    }
  }
  return tree;
}

}  // namespace hgm::runtime
