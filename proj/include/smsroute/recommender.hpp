#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "smsroute/event.hpp"
#include "smsroute/recommendation.hpp"
#include "smsroute/registry.hpp"
#include "smsroute/wire.hpp"

namespace smsroute {

/// 6 characters from the base32 alphabet A-Z2-7, derived from (seed, counter).
std::string correlation_code(std::uint64_t seed, std::uint64_t counter);

struct RecommenderParams {
  std::uint64_t code_seed = 0x5eed;
  int feedback_chain_max = 3;
};

struct Routed {
  Recommendation rec;
};
/// Nothing eligible: `rec` names the nearest facility anyway (possibly none)
/// and carries a code for a later retry.
struct NoFacility {
  Recommendation rec;
};
struct NoLocation {};

using RecommendOutcome = std::variant<Routed, NoFacility, NoLocation>;

struct FeedbackResult {
  Recommendation original;  // with its updated status
  std::optional<RecommendOutcome> reroute;
  bool chain_exhausted = false;
};

class Recommender {
 public:
  explicit Recommender(RecommenderParams params = {}) : params_(params) {}

  void set_sink(EventSink sink) { sink_ = std::move(sink); }
  const RecommenderParams& params() const { return params_; }

  /// Nearest eligible facility by great-circle distance, ties to the smaller
  /// code. Consumes an anticipated bed on success.
  RecommendOutcome recommend(const CaseAssessment& assessment, const LocationEstimate& loc,
                             const std::string& patient_msisdn, FacilityRegistry& registry, Timestamp now);

  /// Resolves the code, updates capacity, and on NO reroutes within the
  /// episode. Throws UnknownCode / DuplicateFeedback.
  FeedbackResult handle_feedback(const Feedback& fb, const std::string& sender, FacilityRegistry& registry,
                                 Timestamp now);

  const Recommendation* find(const std::string& code) const;
  const std::map<std::string, Recommendation>& recommendations() const { return recs_; }
  std::uint64_t counter() const { return counter_; }

  bool apply(const Event& e);
  nlohmann::json to_json() const;
  void load_json(const nlohmann::json& j);

 private:
  RecommendOutcome route(TriageLabel label, int points, const GeoPoint& point, const std::string& msisdn,
                         FacilityRegistry& registry, Timestamp now, const std::string& episode,
                         const std::set<std::string>& excluded);
  void emit(Event e);
  void set_status(const std::string& code, RecommendationStatus status, Timestamp now);

  RecommenderParams params_;
  std::map<std::string, Recommendation> recs_;
  std::map<std::string, std::vector<std::string>> episodes_;
  std::uint64_t counter_ = 0;
  EventSink sink_;
};

nlohmann::json recommendation_to_json(const Recommendation& r);
Recommendation recommendation_from_json(const nlohmann::json& j);

/// Upper-cases and maps anything outside the reply character set to spaces.
std::string reply_safe(std::string_view text);

/// Patient-facing message for each routing outcome. Always within 160
/// characters of the reply set; the facility name is truncated to fit.
OutboundMessage compose_patient_reply(const RecommendOutcome& outcome, const std::string& facility_name,
                                      const std::string& patient_msisdn,
                                      std::optional<std::uint64_t> in_reply_to = std::nullopt);

/// Heads-up to the facility contact; none for UNLIKELY cases, fallbacks or
/// facilities without a contact number.
std::optional<OutboundMessage> compose_facility_alert(const Recommendation& rec, const Facility* facility);

namespace reply_text {
inline constexpr std::string_view kHelp = "SEND SYMPTOMS E.G. FEVER VOMITING VILLAGE NAME";
inline constexpr std::string_view kNoLocation = "SEND VILLAGE NAME TO GET NEAREST CLINIC";
inline constexpr std::string_view kUnknownRef = "UNKNOWN REF";
inline constexpr std::string_view kBadUpdate = "UPDATE NOT UNDERSTOOD. SEND: FAC CODE BEDS NUMBER";
std::string thanks(const std::string& code);
std::string already_received(const std::string& code);
std::string chain_closed(const std::string& code);
std::string unknown_facility(const std::string& code);
std::string update_confirmation(const std::string& code, const CapacityState& state,
                                const std::optional<GeoPoint>& moved_to);
}  // namespace reply_text

}  // namespace smsroute
