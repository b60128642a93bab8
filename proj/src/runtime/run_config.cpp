#include "hgm/runtime/run_config.hpp"

#include <fstream>
#include <set>

#include "hgm/errors.hpp"

namespace hgm::runtime {

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ParameterError("config field '" + field + "': " + what);
}

void reject_unknown(const Json& obj, const std::string& prefix, const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) field_error(prefix + key, "unknown key");
  }
}

double get_number(const Json& obj, const std::string& key, const std::string& prefix, double fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) field_error(prefix + key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const Json& obj, const std::string& key, const std::string& prefix,
                        std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  field_error(prefix + key, "expected a nonnegative integer");
}

std::string get_string(const Json& obj, const std::string& key, const std::string& prefix,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_string()) field_error(prefix + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_reals(const Json& v, const std::string& field) {
  if (!v.is_array()) field_error(field, "expected an array of numbers");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number()) field_error(field, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

env::EnvConfig env_from_json(const Json& obj, const std::filesystem::path& base_dir) {
  const std::string p = "env.";
  if (!obj.is_object()) field_error("env", "expected an object");
  reject_unknown(obj, p,
                 {"preset", "task_count", "root_u", "root_m", "drift_gain", "sigma_u", "sigma_m",
                  "u_m_coupling", "task_difficulty", "difficulty_file", "latency_constant_ms",
                  "latency_exp_mean_ms", "failure_rate", "typed"});
  env::EnvConfig cfg;
  const std::string preset = get_string(obj, "preset", p, "none");
  if (preset == "mismatch") {
    cfg = env::EnvConfig::mismatch();
  } else if (preset != "none") {
    field_error(p + "preset", "unknown preset '" + preset + "'");
  }
  cfg.task_count = get_count(obj, "task_count", p, cfg.task_count);
  cfg.root_u = get_number(obj, "root_u", p, cfg.root_u);
  cfg.root_m = get_number(obj, "root_m", p, cfg.root_m);
  cfg.drift_gain = get_number(obj, "drift_gain", p, cfg.drift_gain);
  cfg.sigma_u = get_number(obj, "sigma_u", p, cfg.sigma_u);
  cfg.sigma_m = get_number(obj, "sigma_m", p, cfg.sigma_m);
  cfg.u_m_coupling = get_number(obj, "u_m_coupling", p, cfg.u_m_coupling);
  cfg.latency_constant_ms = get_number(obj, "latency_constant_ms", p, cfg.latency_constant_ms);
  cfg.latency_exp_mean_ms = get_number(obj, "latency_exp_mean_ms", p, cfg.latency_exp_mean_ms);
  cfg.failure_rate = get_number(obj, "failure_rate", p, cfg.failure_rate);
  if (obj.contains("task_difficulty")) {
    const Json& d = obj.at("task_difficulty");
    if (d.is_string()) {
      if (d.get<std::string>() != "uniform") field_error(p + "task_difficulty", "expected \"uniform\" or a list");
      cfg.task_difficulty.clear();
    } else {
      cfg.task_difficulty = get_reals(d, p + "task_difficulty");
    }
  }
  if (obj.contains("difficulty_file")) {
    if (obj.contains("task_difficulty")) field_error(p + "difficulty_file", "conflicts with task_difficulty");
    std::filesystem::path file = get_string(obj, "difficulty_file", p, "");
    if (file.is_relative()) file = base_dir / file;
    cfg.task_difficulty = env::read_difficulty_file(file);
  }
  if (obj.contains("typed")) {
    const Json& t = obj.at("typed");
    if (!t.is_object()) field_error(p + "typed", "expected an object");
    reject_unknown(t, p + "typed.", {"utilities", "transition", "root_type"});
    env::TypedLineage typed;
    if (!t.contains("utilities")) field_error(p + "typed.utilities", "missing");
    typed.utilities = get_reals(t.at("utilities"), p + "typed.utilities");
    if (!t.contains("transition") || !t.at("transition").is_array()) {
      field_error(p + "typed.transition", "expected a matrix");
    }
    for (const Json& row : t.at("transition")) typed.transition.push_back(get_reals(row, p + "typed.transition"));
    typed.root_type = get_count(t, "root_type", p + "typed.", 0);
    cfg.typed = typed;
  }
  try {
    cfg.validate();
  } catch (const ParameterError& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return cfg;
}

}  // namespace

void RunConfig::validate() const {
  if (budget_B == 0) throw ParameterError("budget must be at least 1");
  if (workers == 0) throw ParameterError("workers must be at least 1");
  policy.validate();
  env.validate();
}

Json to_json(const RunConfig& cfg) {
  Json policy;
  policy["alpha"] = cfg.policy.alpha_widening;
  policy["epsilon"] = cfg.policy.epsilon_percentile;
  policy["scheduler"] = cfg.policy.scheduler == policy::SchedulerKind::BOverB ? "b_over_b" : "constant";
  policy["constant_tau"] = cfg.policy.constant_tau;
  policy["dgm_stage_size"] = cfg.policy.dgm_stage_size;
  policy["dgm_stage_threshold"] = cfg.policy.dgm_stage_threshold;

  Json env;
  env["task_count"] = cfg.env.task_count;
  env["root_u"] = cfg.env.root_u;
  env["root_m"] = cfg.env.root_m;
  env["drift_gain"] = cfg.env.drift_gain;
  env["sigma_u"] = cfg.env.sigma_u;
  env["sigma_m"] = cfg.env.sigma_m;
  env["u_m_coupling"] = cfg.env.u_m_coupling;
  if (cfg.env.task_difficulty.empty()) {
    env["task_difficulty"] = "uniform";
  } else {
    env["task_difficulty"] = cfg.env.task_difficulty;
  }
  env["latency_constant_ms"] = cfg.env.latency_constant_ms;
  env["latency_exp_mean_ms"] = cfg.env.latency_exp_mean_ms;
  env["failure_rate"] = cfg.env.failure_rate;
  if (cfg.env.typed) {
    Json typed;
    typed["utilities"] = cfg.env.typed->utilities;
    typed["transition"] = cfg.env.typed->transition;
    typed["root_type"] = cfg.env.typed->root_type;
    env["typed"] = typed;
  }

  Json doc;
  doc["seed"] = cfg.seed;
  doc["budget"] = cfg.budget_B;
  doc["workers"] = cfg.workers;
  doc["init_expansions"] = cfg.init_expansions;
  doc["policy_kind"] = std::string(policy::to_string(cfg.policy_kind));
  doc["policy"] = policy;
  doc["env"] = env;
  return doc;
}

RunConfig run_config_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ParameterError("config: top level must be an object");
  reject_unknown(doc, "", {"seed", "budget", "workers", "init_expansions", "policy_kind", "policy", "env"});
  RunConfig cfg;
  cfg.seed = get_count(doc, "seed", "", cfg.seed);
  cfg.budget_B = get_count(doc, "budget", "", cfg.budget_B);
  cfg.workers = get_count(doc, "workers", "", cfg.workers);
  cfg.init_expansions = get_count(doc, "init_expansions", "", cfg.init_expansions);
  try {
    cfg.policy_kind = policy::policy_kind_from_string(get_string(doc, "policy_kind", "", "hgm"));
  } catch (const ParameterError& e) {
    field_error("policy_kind", e.what());
  }
  if (doc.contains("policy")) {
    const Json& p = doc.at("policy");
    const std::string pre = "policy.";
    if (!p.is_object()) field_error("policy", "expected an object");
    reject_unknown(p, pre,
                   {"alpha", "epsilon", "scheduler", "constant_tau", "dgm_stage_size", "dgm_stage_threshold"});
    cfg.policy.alpha_widening = get_number(p, "alpha", pre, cfg.policy.alpha_widening);
    cfg.policy.epsilon_percentile = get_number(p, "epsilon", pre, cfg.policy.epsilon_percentile);
    const std::string scheduler = get_string(p, "scheduler", pre, "b_over_b");
    if (scheduler == "b_over_b") {
      cfg.policy.scheduler = policy::SchedulerKind::BOverB;
    } else if (scheduler == "constant") {
      cfg.policy.scheduler = policy::SchedulerKind::Constant;
    } else {
      field_error(pre + "scheduler", "expected \"b_over_b\" or \"constant\"");
    }
    cfg.policy.constant_tau = get_number(p, "constant_tau", pre, cfg.policy.constant_tau);
    cfg.policy.dgm_stage_size = get_count(p, "dgm_stage_size", pre, cfg.policy.dgm_stage_size);
    cfg.policy.dgm_stage_threshold = get_number(p, "dgm_stage_threshold", pre, cfg.policy.dgm_stage_threshold);
  }
  if (doc.contains("env")) cfg.env = env_from_json(doc.at("env"), base_dir);
  try {
    cfg.validate();
  } catch (const ParameterError& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(doc, path.parent_path());
}

void apply_overrides(Json& doc, const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string key = args[i];
    if (key.rfind("--", 0) != 0) throw ParameterError("override '" + key + "' must start with --");
    key = key.substr(2);
    std::string value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= args.size()) throw ParameterError("override --" + key + " needs a value");
      value = args[++i];
    }
    if (key == "policy") key = "policy_kind";
    if (key == "budget_B") key = "budget";

    Json parsed;
    try {
      parsed = Json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      parsed = value;
    }
    Json* cursor = &doc;
    std::size_t start = 0;
    for (;;) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ParameterError("override --" + key + " has an empty path segment");
      if (dot == std::string::npos) {
        (*cursor)[part] = parsed;
        break;
      }
      Json& next = (*cursor)[part];
      if (next.is_null()) next = Json::object();
      if (!next.is_object()) throw ParameterError("override --" + key + " descends into a non-object");
      cursor = &next;
      start = dot + 1;
    }
  }
}

}  // namespace hgm::runtime
