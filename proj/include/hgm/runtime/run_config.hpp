#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgm/env/environment.hpp"
#include "hgm/policy/policy.hpp"

namespace hgm::runtime {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::uint64_t seed = 0;
  std::uint64_t budget_B = 800;
  std::size_t workers = 1;
  std::size_t init_expansions = 5;
  policy::PolicyKind policy_kind = policy::PolicyKind::HGM;
  policy::PolicyConfig policy;
  env::EnvConfig env;

  void validate() const;
};

// Stable key order; task_difficulty is written as "uniform" when empty.
Json to_json(const RunConfig& cfg);

// Unknown keys and type mismatches raise ParameterError naming the field.
// `base_dir` resolves a relative env.difficulty_file.
RunConfig run_config_from_json(const Json& doc, const std::filesystem::path& base_dir = {});

RunConfig load_run_config(const std::filesystem::path& path);

// Applies flat overrides of the form {"--env.sigma_u", "0.1", "--seed", "3"}.
// Values are parsed as JSON when possible and as strings otherwise.
void apply_overrides(Json& doc, const std::vector<std::string>& args);

}  // namespace hgm::runtime
