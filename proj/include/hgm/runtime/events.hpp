#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hgm/runtime/run_config.hpp"

namespace hgm::runtime {

inline constexpr int kEventSchemaVersion = 1;

enum class EventKind {
  RunStart,
  Decision,
  ExpandStart,
  ExpandCommit,
  EvalStart,
  EvalCommit,
  ActionFailed,
  ActionDiscarded,
  Starved,
  FinalSelection,
};

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view name);

// One log record. logical_time counts the state mutations (commits, failures,
// discards) applied before the record was written.
struct RunEvent {
  std::uint64_t seq = 0;
  std::uint64_t logical_time = 0;
  EventKind kind = EventKind::RunStart;
  Json payload = Json::object();
};

// {"seq":..,"t":..,"kind":"..", <payload fields>} on a single line.
std::string to_line(const RunEvent& event);
RunEvent parse_event_line(std::string_view line, std::size_t line_no);

// Append-only, newline-delimited event log. A non-recording log still hands
// out sequence numbers but keeps nothing (used by rollouts).
class EventLog {
 public:
  explicit EventLog(bool recording = true) : recording_(recording) {}

  bool recording() const noexcept { return recording_; }
  const RunEvent& append(EventKind kind, std::uint64_t logical_time, Json payload);
  const std::vector<RunEvent>& events() const noexcept { return events_; }
  std::uint64_t next_seq() const noexcept { return next_seq_; }

  void write(std::ostream& out) const;
  std::string str() const;

  // Parse errors carry the 1-based line number.
  static EventLog read(std::istream& in);
  static EventLog read_file(const std::string& path);

 private:
  bool recording_;
  std::uint64_t next_seq_ = 0;
  std::vector<RunEvent> events_;
  RunEvent scratch_;
};

}  // namespace hgm::runtime
