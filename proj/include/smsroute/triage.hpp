#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string_view>
#include <utility>

#include "smsroute/geo.hpp"
#include "smsroute/parser.hpp"
#include "smsroute/time.hpp"

namespace smsroute {

/// Additive case-definition rubric. Fever is the anchor: nothing is LIKELY
/// without it.
struct RubricWeights {
  int fever_pts = 2;
  int common_symptom_pts = 1;  // each of the seven non-specific symptoms
  int hemorrhage_pts = 2;
  int epi_pts = 2;  // once, if any exposure flag is present
  int spatial_prior_pts = 1;
  int likely_threshold = 5;
  int possible_threshold = 3;

  bool valid() const;
  bool operator==(const RubricWeights&) const = default;
};

struct PriorParams {
  double radius_km = 20.0;
  int min_cases = 3;
  int incubation_days = 21;
};

enum class TriageLabel { Likely, Possible, Unlikely };
std::string_view to_string(TriageLabel l);
std::optional<TriageLabel> parse_label(std::string_view s);

struct CaseAssessment {
  SymptomReport report;
  int points = 0;
  double score = 0.0;
  TriageLabel label = TriageLabel::Unlikely;
  bool spatial_prior_applied = false;
  Timestamp assessed_at{};

  bool operator==(const CaseAssessment&) const = default;
};

/// Rubric points for a symptom/exposure combination, before the prior.
int rubric_points(const SymptomSet& symptoms, const EpiFlagSet& epi, const RubricWeights& w);

/// Pure rubric scoring with a known prior outcome.
CaseAssessment score_report(const SymptomReport& report, bool prior_applied, const RubricWeights& w,
                            Timestamp now);

/// Located assessments inside the incubation window. Only LIKELY entries
/// with a point are indexed for the spatial prior.
class CaseHistory {
 public:
  struct Entry {
    TriageLabel label = TriageLabel::Unlikely;
    std::optional<GeoPoint> point;
    Timestamp at{};
    bool operator==(const Entry&) const = default;
  };

  explicit CaseHistory(int incubation_days = 21) : window_days_(incubation_days) {}

  /// Entries must arrive in non-decreasing time order.
  void add(const Entry& entry);
  void prune(Timestamp now);

  /// LIKELY entries within `radius_km` of `p` aged [0, window] at `now`,
  /// counting stops at `limit`.
  int count_likely_near(const GeoPoint& p, double radius_km, Timestamp now, int limit) const;

  const std::deque<Entry>& entries() const { return entries_; }
  int window_days() const { return window_days_; }

 private:
  using BucketKey = std::pair<int, int>;
  static BucketKey bucket_of(const GeoPoint& p);

  int window_days_;
  std::deque<Entry> entries_;
  std::map<BucketKey, std::deque<Entry>> likely_;
};

bool spatial_prior(const LocationEstimate& loc, const CaseHistory& history, Timestamp now,
                   const PriorParams& params = {});

/// Prior + rubric, then records the assessment in `history`.
CaseAssessment assess(const SymptomReport& report, const LocationEstimate& loc, CaseHistory& history,
                      const RubricWeights& weights, Timestamp now, const PriorParams& params = {});

/// Negative feedback on a LIKELY case that sat exactly on the threshold
/// raises the threshold by `tune_step`, clamped to [3, 8].
RubricWeights apply_feedback_tuning(const Feedback& fb, const CaseAssessment& original,
                                    const RubricWeights& weights, int tune_step);

}  // namespace smsroute
