#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "smsroute/event.hpp"
#include "smsroute/geo.hpp"
#include "smsroute/lexicon.hpp"
#include "smsroute/parser.hpp"
#include "smsroute/recommendation.hpp"
#include "smsroute/triage.hpp"

namespace smsroute {

enum class Capability : std::uint8_t { Isolation, General };
using CapabilitySet = EnumSet<Capability, 2>;
std::string_view to_string(Capability c);

namespace capacity {
struct Available {
  bool operator==(const Available&) const = default;
};
struct PresumedFull {
  Timestamp since{};
  bool operator==(const PresumedFull&) const = default;
};
struct Reported {
  long beds_anticipated = 0;
  Timestamp at{};
  bool operator==(const Reported&) const = default;
};
}  // namespace capacity

using CapacityState = std::variant<capacity::Available, capacity::PresumedFull, capacity::Reported>;
std::string describe(const CapacityState& s);

struct Facility {
  std::string code;
  std::string name;
  GeoPoint point;
  std::string contact_msisdn;
  CapabilitySet capabilities;
  CapacityState capacity = capacity::Available{};

  bool operator==(const Facility&) const = default;
};

/// Whether a facility with these capabilities may receive a case with this label.
bool admits(const CapabilitySet& caps, TriageLabel label);

class UnknownFacility : public std::runtime_error {
 public:
  explicit UnknownFacility(const std::string& code) : std::runtime_error("unknown facility " + code), code_(code) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};
class UnknownCode : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DuplicateFeedback : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RegistryParams {
  std::chrono::hours ttl{24};
};

/// Knowledge base of health services. Every mutation is an event: live
/// operations build the event, apply it, then hand it to the sink, so
/// folding the emitted events from an empty registry reproduces the state.
class FacilityRegistry {
 public:
  explicit FacilityRegistry(RegistryParams params = {}) : params_(params) {}

  void set_sink(EventSink sink) { sink_ = std::move(sink); }
  const RegistryParams& params() const { return params_; }

  /// `code,name,lat,lon,contact,capabilities(;-separated)`.
  std::size_t import_seed(const std::filesystem::path& path, Timestamp now, LoadStats* stats = nullptr);
  void add_facility(const Facility& f, Timestamp now);

  CapacityState apply_facility_update(const FacilityUpdate& u, Timestamp now);
  CapacityState apply_feedback(const Feedback& fb, const Recommendation& rec, Timestamp now);
  CapacityState on_recommendation(const std::string& code, const std::string& ref, Timestamp now);

  /// Current state with the TTL applied; expiring a PRESUMED_FULL emits
  /// STATE_EXPIRED.
  CapacityState effective_state(const std::string& code, Timestamp now);
  /// Same answer without emitting anything.
  CapacityState peek_state(const Facility& f, Timestamp now) const;

  /// Facilities that are not presumed full and admit the label, by code.
  std::vector<const Facility*> eligible(TriageLabel label, Timestamp now);

  const Facility* find(const std::string& code) const;
  const Facility* find_by_contact(const std::string& msisdn) const;
  const std::map<std::string, Facility>& facilities() const { return facilities_; }

  /// Fold one registry event. Returns false for kinds the registry does not own.
  bool apply(const Event& e);

  nlohmann::json to_json() const;
  void load_json(const nlohmann::json& j);

 private:
  void emit(Event e);
  Facility& at(const std::string& code);

  RegistryParams params_;
  std::map<std::string, Facility> facilities_;
  EventSink sink_;
};

nlohmann::json capacity_to_json(const CapacityState& s);
CapacityState capacity_from_json(const nlohmann::json& j);

}  // namespace smsroute
