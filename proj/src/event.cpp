#include "smsroute/event.hpp"
#include "smsroute/errors.hpp"

#include <array>
#include <stdexcept>

namespace smsroute {

namespace {
constexpr std::array<std::string_view, 14> kKindNames = {
    "CONFIG_LOADED",     "SEED_IMPORT",       "FACILITY_UPDATE",       "FEEDBACK_POSITIVE",
    "FEEDBACK_NEGATIVE", "RECOMMENDATION_ISSUED", "STATE_EXPIRED",     "FRAME_RECEIVED",
    "ASSESSMENT",        "RECOMMENDATION",    "RECOMMENDATION_STATUS", "WEIGHTS_TUNED",
    "REPLY",             "CASE_RECORD"};
}

std::string_view to_string(EventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<EventKind>(i);
  return std::nullopt;
}

std::string to_json_line(const Event& e) {
  nlohmann::json j;
  j["seq"] = e.seq;
  j["kind"] = to_string(e.kind);
  j["at"] = to_epoch(e.at);
  j["data"] = e.data;
  return j.dump();
}

Event event_from_json_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  Event e;
  e.seq = j.at("seq").get<std::uint64_t>();
  const auto kind = parse_event_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown event kind " + j.at("kind").get<std::string>());
  e.kind = *kind;
  e.at = from_epoch(j.at("at").get<std::int64_t>());
  e.data = j.at("data");
  return e;
}

EventLog::EventLog(std::filesystem::path path, bool truncate) : path_(std::move(path)) {
  if (!truncate && std::filesystem::exists(path_)) {
    for (const auto& e : read(path_)) last_seq_ = e.seq;
  }
  out_.open(path_, truncate ? (std::ios::binary | std::ios::trunc) : (std::ios::binary | std::ios::app));
  if (!out_) throw std::runtime_error("cannot open event log " + path_.string());
}

std::uint64_t EventLog::append(Event& e) {
  e.seq = ++last_seq_;
  out_ << to_json_line(e) << '\n';
  return e.seq;
}

void EventLog::flush() { out_.flush(); }

std::vector<Event> EventLog::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(std::move(line));
  std::vector<Event> events;
  events.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      events.push_back(event_from_json_line(lines[i]));
    } catch (const nlohmann::json::exception&) {
      // A torn final line is what an interrupted write leaves behind.
      if (i + 1 == lines.size()) break;
      throw;
    }
  }
  return events;
}

}  // namespace smsroute
