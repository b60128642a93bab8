#include "hgm/runtime/events.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "hgm/errors.hpp"

namespace hgm::runtime {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 10> kKindNames{{
    {EventKind::RunStart, "RunStart"},
    {EventKind::Decision, "Decision"},
    {EventKind::ExpandStart, "ExpandStart"},
    {EventKind::ExpandCommit, "ExpandCommit"},
    {EventKind::EvalStart, "EvalStart"},
    {EventKind::EvalCommit, "EvalCommit"},
    {EventKind::ActionFailed, "ActionFailed"},
    {EventKind::ActionDiscarded, "ActionDiscarded"},
    {EventKind::Starved, "Starved"},
    {EventKind::FinalSelection, "FinalSelection"},
}};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

EventKind event_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ParameterError("unknown event kind '" + std::string(name) + "'");
}

std::string to_line(const RunEvent& event) {
  Json line;
  line["seq"] = event.seq;
  line["t"] = event.logical_time;
  line["kind"] = std::string(to_string(event.kind));
  for (const auto& [key, value] : event.payload.items()) line[key] = value;
  return line.dump();
}

RunEvent parse_event_line(std::string_view text, std::size_t line_no) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(line_no, "event must be a JSON object");
  RunEvent event;
  try {
    event.seq = doc.at("seq").get<std::uint64_t>();
    event.logical_time = doc.at("t").get<std::uint64_t>();
    event.kind = event_kind_from_string(doc.at("kind").get<std::string>());
  } catch (const std::exception& e) {
    throw ParseError(line_no, std::string("malformed event header: ") + e.what());
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "seq" && key != "t" && key != "kind") event.payload[key] = value;
  }
  return event;
}

const RunEvent& EventLog::append(EventKind kind, std::uint64_t logical_time, Json payload) {
  RunEvent event{next_seq_++, logical_time, kind, std::move(payload)};
  if (!recording_) {
    scratch_ = std::move(event);
    return scratch_;
  }
  events_.push_back(std::move(event));
  return events_.back();
}

void EventLog::write(std::ostream& out) const {
  for (const RunEvent& e : events_) out << to_line(e) << '\n';
}

std::string EventLog::str() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

EventLog EventLog::read(std::istream& in) {
  EventLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    RunEvent event = parse_event_line(line, line_no);
    if (event.seq != log.next_seq_) {
      throw ParseError(line_no, "sequence number " + std::to_string(event.seq) + " out of order");
    }
    log.next_seq_ = event.seq + 1;
    log.events_.push_back(std::move(event));
  }
  return log;
}

EventLog EventLog::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open event log " + path);
  return read(in);
}

}  // namespace hgm::runtime
