#pragma once

#include <cstdint>
#include <filesystem>

#include "hgm/env/environment.hpp"
#include "hgm/runtime/run_config.hpp"

namespace hgm::runtime {

inline constexpr int kSnapshotSchemaVersion = 1;

// A quiescent search state: enough to resume the run with continue_sequential.
struct Snapshot {
  RunConfig config;
  env::LatentWorld world;
  std::uint64_t next_action_seq = 0;
};

// Task outcomes are stored as a per-node string over {'.', 's', 'f'} plus the
// remaining-task order. Trees with in-flight work are rejected.
Json to_json(const Snapshot& snapshot);
Snapshot snapshot_from_json(const Json& doc);

void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& path);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace hgm::runtime
