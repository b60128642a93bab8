#include "hgm/runtime/drivers.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "hgm/errors.hpp"

namespace hgm::runtime {

namespace {

Completion execute(env::Executor& executor, const Dispatch& d) {
  Completion c;
  c.action_seq = d.action_seq;
  try {
    if (d.action.kind == policy::ActionKind::Expand) {
      c.child = executor.expand(d.handle, d.action_seq);
    } else {
      c.success = executor.evaluate(d.handle, *d.action.task, d.action_seq);
    }
  } catch (const env::ExecutorFailure&) {
    c.failed = true;
  }
  return c;
}

RunResult package(Coordinator& coord, env::SyntheticExecutor& executor, EventLog& log) {
  const AgentId best = coord.finalize();
  std::vector<env::LatentAgent> latents;
  latents.reserve(coord.tree().size());
  for (env::AgentHandle h : coord.handles()) latents.push_back(executor.latent(h));
  const bool completed = coord.tree().total_evaluations() == coord.config().budget_B;
  return RunResult{coord.tree(), best, std::move(log), std::move(latents), completed,
                   executor.simulated_latency_ms()};
}

}  // namespace

void drive_sequential(Coordinator& coord, env::Executor& executor) {
  while (!coord.budget_complete()) {
    std::optional<Dispatch> d = coord.next_dispatch();
    if (!d) {
      coord.mark_starved();
      return;
    }
    coord.complete(execute(executor, *d));
  }
}

void drive_async(Coordinator& coord, env::Executor& executor, std::size_t workers) {
  if (workers == 0) throw ParameterError("drive_async: workers must be positive");
  std::mutex mutex;
  std::condition_variable work_ready;
  std::condition_variable result_ready;
  std::deque<Dispatch> jobs;
  std::deque<Completion> results;
  bool stopping = false;

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        Dispatch job;
        {
          std::unique_lock lock(mutex);
          work_ready.wait(lock, [&] { return stopping || !jobs.empty(); });
          if (stopping) return;
          job = jobs.front();
          jobs.pop_front();
        }
        Completion done = execute(executor, job);
        {
          std::lock_guard lock(mutex);
          results.push_back(done);
        }
        result_ready.notify_one();
      }
    });
  }

  std::size_t inflight = 0;
  while (!coord.budget_complete()) {
    while (inflight < workers) {
      std::optional<Dispatch> d = coord.next_dispatch();
      if (!d) break;
      {
        std::lock_guard lock(mutex);
        jobs.push_back(*d);
      }
      work_ready.notify_one();
      ++inflight;
    }
    if (inflight == 0) {
      coord.mark_starved();
      break;
    }
    Completion c;
    {
      std::unique_lock lock(mutex);
      result_ready.wait(lock, [&] { return !results.empty(); });
      c = results.front();
      results.pop_front();
    }
    coord.complete(c);
    --inflight;
  }

  {
    std::lock_guard lock(mutex);
    stopping = true;
    jobs.clear();
  }
  work_ready.notify_all();
  for (std::thread& t : pool) t.join();
  coord.discard_inflight();
}

RunResult run_sequential(const RunConfig& cfg, bool record_log) {
  cfg.validate();
  env::SyntheticExecutor executor(cfg.env, cfg.seed);
  EventLog log(record_log);
  Coordinator coord(cfg, log, executor.root());
  coord.log_run_start();
  drive_sequential(coord, executor);
  coord.discard_inflight();
  return package(coord, executor, log);
}

RunResult run_async(const RunConfig& cfg) {
  cfg.validate();
  env::SyntheticExecutor executor(cfg.env, cfg.seed);
  EventLog log;
  Coordinator coord(cfg, log, executor.root());
  coord.log_run_start();
  drive_async(coord, executor, cfg.workers);
  return package(coord, executor, log);
}

void continue_sequential(const RunConfig& cfg, LatentWorld& world, std::uint64_t first_action_seq) {
  if (world.latents.size() != world.tree.size()) throw UsageError("LatentWorld: one latent per node required");
  env::SyntheticExecutor executor(cfg.env, cfg.seed, world.latents);
  std::vector<env::AgentHandle> handles(world.tree.size());
  for (std::size_t i = 0; i < handles.size(); ++i) handles[i] = i;
  EventLog log(false);
  RunConfig quiet = cfg;
  quiet.init_expansions = 0;
  Coordinator coord(quiet, log, world.tree, std::move(handles), first_action_seq);
  drive_sequential(coord, executor);
  coord.discard_inflight();
  world.tree = coord.tree();
  world.latents.clear();
  for (env::AgentHandle h : coord.handles()) world.latents.push_back(executor.latent(h));
}

}  // namespace hgm::runtime
