#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "smsroute/time.hpp"

namespace smsroute {

enum class EventKind {
  ConfigLoaded,
  SeedImport,
  FacilityUpdate,
  FeedbackPositive,
  FeedbackNegative,
  RecommendationIssued,
  StateExpired,
  FrameReceived,
  Assessment,
  Recommendation,
  RecommendationStatus,
  WeightsTuned,
  Reply,
  CaseRecord,
};

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

/// One entry of the append-only log. `seq` is assigned when the entry is written.
struct Event {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Reply;
  Timestamp at{};
  nlohmann::json data = nlohmann::json::object();

  bool operator==(const Event&) const = default;
};

std::string to_json_line(const Event& e);
Event event_from_json_line(std::string_view line);

using EventSink = std::function<void(const Event&)>;

/// JSON-lines event log. Opening an existing file continues its sequence.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path, bool truncate = false);

  /// Assigns the next seq and writes the entry (buffered until flush()).
  std::uint64_t append(Event& e);
  void flush();

  std::uint64_t last_seq() const { return last_seq_; }
  const std::filesystem::path& path() const { return path_; }

  static std::vector<Event> read(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t last_seq_ = 0;
};

}  // namespace smsroute
