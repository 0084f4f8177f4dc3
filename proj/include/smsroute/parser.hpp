#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "smsroute/geo.hpp"
#include "smsroute/lexicon.hpp"

namespace smsroute {

enum class Intent { SymptomReport, Feedback, FacilityUpdate, Unknown };
std::string_view to_string(Intent i);

struct SymptomReport {
  SymptomSet symptoms;
  EpiFlagSet epi_flags;
  std::optional<int> duration_days;
  std::optional<std::string> location_hint;
  std::vector<std::string> unmatched_tokens;

  bool operator==(const SymptomReport&) const = default;
};

enum class Polarity { Positive, Negative };

struct Feedback {
  std::string code;
  Polarity polarity = Polarity::Positive;

  bool operator==(const Feedback&) const = default;
};

struct FacilityUpdate {
  /// Uppercase code after `FAC`; empty when the sender's registered contact
  /// number identifies the facility instead.
  std::string facility_code;
  std::optional<long> beds_available;
  std::optional<GeoPoint> new_location;

  bool operator==(const FacilityUpdate&) const = default;
};

struct ParsedMessage {
  Intent intent = Intent::Unknown;
  std::variant<std::monostate, SymptomReport, Feedback, FacilityUpdate> payload;
};

class NoSymptoms : public std::runtime_error {
 public:
  NoSymptoms() : std::runtime_error("no symptoms or exposure flags") {}
};
class BadCode : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadUpdate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `[A-Z2-7]{6}` after upper-casing.
bool is_feedback_code(std::string_view token);

Intent classify_intent(std::span<const std::string> tokens, const Lexicon& lexicon);

SymptomReport parse_symptom_report(std::span<const std::string> tokens, const Lexicon& lexicon);
Feedback parse_feedback(std::span<const std::string> tokens);
FacilityUpdate parse_facility_update(std::span<const std::string> tokens, const Lexicon& lexicon);

/// normalize + classify + the matching payload parser. Payload errors demote
/// the message to Unknown with `error` describing why.
struct ParseOutcome {
  ParsedMessage message;
  std::vector<std::string> tokens;
  std::optional<Intent> rejected_intent;
  std::string error;
};
ParseOutcome parse_message(std::string_view body, const Lexicon& lexicon);

}  // namespace smsroute
