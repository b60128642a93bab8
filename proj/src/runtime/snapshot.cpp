#include "hgm/runtime/snapshot.hpp"

#include <fstream>

#include "hgm/errors.hpp"

namespace hgm::runtime {

Json to_json(const Snapshot& snapshot) {
  const SearchTree& tree = snapshot.world.tree;
  if (tree.pending_evals_total() != 0 || tree.pending_expansions_total() != 0) {
    throw UsageError("cannot snapshot a tree with in-flight work");
  }
  if (snapshot.world.latents.size() != tree.size()) throw UsageError("snapshot needs one latent per node");
  Json nodes = Json::array();
  for (const AgentNode& n : tree.nodes()) {
    std::string outcomes(tree.task_count(), '.');
    for (std::size_t t = 0; t < tree.task_count(); ++t) {
      if (n.task_states[t] == TaskState::Succeeded) outcomes[t] = 's';
      if (n.task_states[t] == TaskState::Failed) outcomes[t] = 'f';
    }
    Json remaining = Json::array();
    for (TaskId t : n.remaining_tasks) remaining.push_back(t.index);
    const env::LatentAgent& l = snapshot.world.latents[n.id.index];
    Json entry;
    entry["id"] = n.id.index;
    entry["parent"] = n.parent ? Json(n.parent->index) : Json(nullptr);
    entry["outcomes"] = outcomes;
    entry["remaining"] = remaining;
    entry["latent"] = {{"u", l.u}, {"m", l.m}, {"type", l.type}};
    nodes.push_back(std::move(entry));
  }
  Json doc;
  doc["schema"] = kSnapshotSchemaVersion;
  doc["config"] = to_json(snapshot.config);
  doc["next_action_seq"] = snapshot.next_action_seq;
  doc["nodes"] = std::move(nodes);
  return doc;
}

Snapshot snapshot_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("schema") || doc.at("schema") != kSnapshotSchemaVersion) {
    throw ParameterError("unsupported snapshot schema (this build reads version " +
                         std::to_string(kSnapshotSchemaVersion) + ")");
  }
  Snapshot out;
  out.config = run_config_from_json(doc.at("config"));
  const std::size_t task_count = out.config.env.task_count;
  try {
    out.next_action_seq = doc.at("next_action_seq").get<std::uint64_t>();
    std::vector<AgentNode> nodes;
    for (const Json& entry : doc.at("nodes")) {
      AgentNode n;
      n.id = AgentId{entry.at("id").get<std::size_t>()};
      if (!entry.at("parent").is_null()) {
        const AgentId parent{entry.at("parent").get<std::size_t>()};
        if (parent.index >= nodes.size()) throw ParameterError("snapshot parent must precede its child");
        n.parent = parent;
        nodes[parent.index].children.push_back(n.id);
      }
      const auto outcomes = entry.at("outcomes").get<std::string>();
      if (outcomes.size() != task_count) throw ParameterError("snapshot outcome string has the wrong length");
      n.task_states.assign(task_count, TaskState::Remaining);
      for (std::size_t t = 0; t < task_count; ++t) {
        if (outcomes[t] == 's') {
          n.task_states[t] = TaskState::Succeeded;
          ++n.n_success;
        } else if (outcomes[t] == 'f') {
          n.task_states[t] = TaskState::Failed;
          ++n.n_failure;
        } else if (outcomes[t] != '.') {
          throw ParameterError("snapshot outcome strings use '.', 's' and 'f'");
        }
      }
      for (const Json& t : entry.at("remaining")) n.remaining_tasks.push_back(TaskId{t.get<std::size_t>()});
      const Json& l = entry.at("latent");
      out.world.latents.push_back({l.at("u").get<double>(), l.at("m").get<double>(), l.at("type").get<std::size_t>()});
      nodes.push_back(std::move(n));
    }
    // Clade counters: children always follow their parents.
    for (auto& n : nodes) {
      n.clade_success = n.n_success;
      n.clade_failure = n.n_failure;
    }
    for (std::size_t i = nodes.size(); i-- > 1;) {
      const std::size_t p = nodes[i].parent->index;
      nodes[p].clade_success += nodes[i].clade_success;
      nodes[p].clade_failure += nodes[i].clade_failure;
    }
    try {
      out.world.tree = SearchTree::from_nodes(task_count, std::move(nodes));
    } catch (const UsageError& e) {
      throw ParameterError(std::string("snapshot: ") + e.what());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("snapshot: ") + e.what());
  }
  return out;
}

void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << to_json(snapshot).dump(1) << '\n';
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("snapshot " + path.string() + ": " + e.what());
  }
  return snapshot_from_json(doc);
}

}  // namespace hgm::runtime
