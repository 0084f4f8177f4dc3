#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "smsroute/geo.hpp"
#include "smsroute/time.hpp"
#include "smsroute/triage.hpp"

namespace smsroute {

enum class RecommendationStatus { Open, Confirmed, Rejected, Rerouted };
std::string_view to_string(RecommendationStatus s);
std::optional<RecommendationStatus> parse_recommendation_status(std::string_view s);

struct Recommendation {
  std::string code;
  std::string patient_msisdn;
  /// Empty when no facility at all was known.
  std::string facility_code;
  double distance_km = 0.0;
  TriageLabel label = TriageLabel::Unlikely;
  int points = 0;
  Timestamp issued_at{};
  RecommendationStatus status = RecommendationStatus::Open;
  /// Code of the first recommendation in this patient's reroute chain.
  std::string episode;
  GeoPoint patient_point;
  /// False for the all-full fallback: the named facility was not confirmed
  /// to have room and no capacity was consumed.
  bool capacity_checked = true;

  bool operator==(const Recommendation&) const = default;
};

}  // namespace smsroute
