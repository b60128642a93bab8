#include "hgm/env/environment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "hgm/errors.hpp"

namespace hgm::env {

namespace {

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void EnvConfig::validate() const {
  if (task_count == 0) throw ParameterError("env.task_count must be positive");
  if (!unit(root_u)) throw ParameterError("env.root_u must lie in [0, 1]");
  if (!unit(root_m)) throw ParameterError("env.root_m must lie in [0, 1]");
  if (!std::isfinite(drift_gain)) throw ParameterError("env.drift_gain must be finite");
  if (!(sigma_u >= 0.0 && std::isfinite(sigma_u))) throw ParameterError("env.sigma_u must be >= 0");
  if (!(sigma_m >= 0.0 && std::isfinite(sigma_m))) throw ParameterError("env.sigma_m must be >= 0");
  if (!(u_m_coupling >= -1.0 && u_m_coupling <= 1.0)) {
    throw ParameterError("env.u_m_coupling must lie in [-1, 1]");
  }
  if (!task_difficulty.empty() && task_difficulty.size() != task_count) {
    throw ParameterError("env.task_difficulty must have task_count entries");
  }
  for (double d : task_difficulty) {
    if (!std::isfinite(d)) throw ParameterError("env.task_difficulty entries must be finite");
  }
  if (!(latency_constant_ms >= 0.0) || !(latency_exp_mean_ms >= 0.0)) {
    throw ParameterError("env latency parameters must be >= 0");
  }
  if (!unit(failure_rate) || failure_rate == 1.0) throw ParameterError("env.failure_rate must lie in [0, 1)");
  if (typed) {
    const std::size_t k = typed->utilities.size();
    if (k == 0) throw ParameterError("env.typed.utilities must be nonempty");
    if (typed->transition.size() != k) throw ParameterError("env.typed.transition must be square");
    if (typed->root_type >= k) throw ParameterError("env.typed.root_type out of range");
    for (std::size_t i = 0; i < k; ++i) {
      if (!unit(typed->utilities[i])) throw ParameterError("env.typed.utilities must lie in [0, 1]");
      if (typed->transition[i].size() != k) throw ParameterError("env.typed.transition must be square");
      double sum = 0.0;
      for (double p : typed->transition[i]) {
        if (!(p >= 0.0)) throw ParameterError("env.typed.transition entries must be >= 0");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("env.typed.transition rows must sum to 1");
    }
  }
}

EnvConfig EnvConfig::mismatch() {
  EnvConfig cfg;
  cfg.task_count = 60;
  cfg.root_u = 0.4;
  cfg.root_m = 0.5;
  cfg.drift_gain = 0.2;
  cfg.sigma_u = 0.08;
  cfg.sigma_m = 0.25;
  cfg.u_m_coupling = -0.8;
  return cfg;
}

double difficulty_offset(const EnvConfig& cfg, TaskId task) {
  if (task.index >= cfg.task_count) throw UsageError("unknown task " + std::to_string(task.index));
  return cfg.task_difficulty.empty() ? 0.0 : cfg.task_difficulty[task.index];
}

double success_probability(const LatentAgent& agent, TaskId task, const EnvConfig& cfg) {
  return clip01(agent.u + difficulty_offset(cfg, task));
}

LatentAgent spawn_root(const EnvConfig& cfg) {
  if (cfg.typed) {
    return {cfg.typed->utilities[cfg.typed->root_type], cfg.root_m, cfg.typed->root_type};
  }
  return {cfg.root_u, cfg.root_m, 0};
}

LatentAgent mutate(const LatentAgent& parent, const EnvConfig& cfg, RandomStream& rng) {
  if (cfg.typed) {
    const auto& row = cfg.typed->transition.at(parent.type);
    const double draw = rng.uniform_open();
    double running = 0.0;
    std::size_t child = row.size() - 1;
    for (std::size_t k = 0; k < row.size(); ++k) {
      running += row[k];
      if (draw < running) {
        child = k;
        break;
      }
    }
    // Guard against rows whose float sum ends just below one.
    while (row[child] == 0.0 && child > 0) --child;
    return {cfg.typed->utilities[child], parent.m, child};
  }
  const double g1 = rng.normal();
  const double g2 = rng.normal();
  const double rho = cfg.u_m_coupling;
  LatentAgent child;
  child.u = clip01(parent.u + cfg.drift_gain * (parent.m - 0.5) + cfg.sigma_u * g1);
  child.m = clip01(parent.m + cfg.sigma_m * (rho * g1 + std::sqrt(1.0 - rho * rho) * g2));
  child.type = parent.type;
  return child;
}

bool evaluate_task(const LatentAgent& agent, TaskId task, const EnvConfig& cfg, RandomStream& rng) {
  return rng.uniform_open() < success_probability(agent, task, cfg);
}

std::vector<double> read_difficulty_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open difficulty file " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    double value = 0.0;
    if (!(fields >> value)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError(line_no, "expected a real number in " + path.string());
    }
    std::string rest;
    if (fields >> rest) throw ParseError(line_no, "trailing text in " + path.string());
    out.push_back(value);
  }
  return out;
}

}  // namespace hgm::env
