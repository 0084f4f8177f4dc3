#include "smsroute/triage.hpp"

#include <algorithm>
#include <cmath>

namespace smsroute {

namespace {
constexpr double kBucketDeg = 0.25;
constexpr int kMinThreshold = 3;
constexpr int kMaxThreshold = 8;
}  // namespace

bool RubricWeights::valid() const {
  return fever_pts >= 0 && common_symptom_pts >= 0 && hemorrhage_pts >= 0 && epi_pts >= 0 &&
         spatial_prior_pts >= 0 && possible_threshold >= 0 && likely_threshold >= 0 &&
         possible_threshold <= likely_threshold;
}

std::string_view to_string(TriageLabel l) {
  switch (l) {
    case TriageLabel::Likely: return "LIKELY";
    case TriageLabel::Possible: return "POSSIBLE";
    case TriageLabel::Unlikely: break;
  }
  return "UNLIKELY";
}

std::optional<TriageLabel> parse_label(std::string_view s) {
  for (auto l : {TriageLabel::Likely, TriageLabel::Possible, TriageLabel::Unlikely})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

int rubric_points(const SymptomSet& symptoms, const EpiFlagSet& epi, const RubricWeights& w) {
  int points = 0;
  for (Symptom s : symptoms.items()) {
    switch (s) {
      case Symptom::Fever: points += w.fever_pts; break;
      case Symptom::Hemorrhage: points += w.hemorrhage_pts; break;
      default: points += w.common_symptom_pts; break;
    }
  }
  if (!epi.empty()) points += w.epi_pts;
  return points;
}

CaseAssessment score_report(const SymptomReport& report, bool prior_applied, const RubricWeights& w,
                            Timestamp now) {
  CaseAssessment a;
  a.report = report;
  a.points = rubric_points(report.symptoms, report.epi_flags, w) + (prior_applied ? w.spatial_prior_pts : 0);
  a.score = std::clamp(a.points / 10.0, 0.0, 1.0);
  a.spatial_prior_applied = prior_applied;
  a.assessed_at = now;
  if (report.symptoms.contains(Symptom::Fever) && a.points >= w.likely_threshold)
    a.label = TriageLabel::Likely;
  else if (a.points >= w.possible_threshold)
    a.label = TriageLabel::Possible;
  else
    a.label = TriageLabel::Unlikely;
  return a;
}

CaseHistory::BucketKey CaseHistory::bucket_of(const GeoPoint& p) {
  return {static_cast<int>(std::floor(p.lat() / kBucketDeg)),
          static_cast<int>(std::floor(p.lon() / kBucketDeg))};
}

void CaseHistory::add(const Entry& entry) {
  entries_.push_back(entry);
  if (entry.label == TriageLabel::Likely && entry.point) likely_[bucket_of(*entry.point)].push_back(entry);
}

void CaseHistory::prune(Timestamp now) {
  const Timestamp cutoff = now - std::chrono::days{window_days_};
  while (!entries_.empty() && entries_.front().at < cutoff) entries_.pop_front();
  for (auto it = likely_.begin(); it != likely_.end();) {
    auto& q = it->second;
    while (!q.empty() && q.front().at < cutoff) q.pop_front();
    it = q.empty() ? likely_.erase(it) : std::next(it);
  }
}

int CaseHistory::count_likely_near(const GeoPoint& p, double radius_km, Timestamp now, int limit) const {
  if (limit <= 0) return 0;
  const Timestamp cutoff = now - std::chrono::days{window_days_};
  // Degrees spanned by the radius; longitude widens toward the poles.
  const double km_per_deg = kEarthRadiusKm * std::numbers::pi / 180.0;
  const double dlat = radius_km / km_per_deg;
  const double cos_lat = std::cos((std::min(89.0, std::abs(p.lat()) + dlat)) * std::numbers::pi / 180.0);
  const double dlon = std::min(180.0, dlat / std::max(cos_lat, 1e-6));
  const auto lo = bucket_of(GeoPoint(std::max(-90.0, p.lat() - dlat), std::max(-180.0, p.lon() - dlon)));
  const auto hi = bucket_of(GeoPoint(std::min(90.0, p.lat() + dlat), std::min(179.999999, p.lon() + dlon)));
  int count = 0;
  for (auto it = likely_.lower_bound({lo.first, lo.second}); it != likely_.end() && it->first.first <= hi.first; ++it) {
    if (it->first.second < lo.second || it->first.second > hi.second) continue;
    for (const auto& e : it->second) {
      if (e.at < cutoff || e.at > now) continue;
      if (haversine_km(*e.point, p) <= radius_km && ++count >= limit) return count;
    }
  }
  return count;
}

bool spatial_prior(const LocationEstimate& loc, const CaseHistory& history, Timestamp now,
                   const PriorParams& params) {
  if (!loc.point) return false;
  return history.count_likely_near(*loc.point, params.radius_km, now, params.min_cases) >= params.min_cases;
}

CaseAssessment assess(const SymptomReport& report, const LocationEstimate& loc, CaseHistory& history,
                      const RubricWeights& weights, Timestamp now, const PriorParams& params) {
  const bool prior = spatial_prior(loc, history, now, params);
  auto a = score_report(report, prior, weights, now);
  history.prune(now);
  history.add({a.label, loc.point, now});
  return a;
}

RubricWeights apply_feedback_tuning(const Feedback& fb, const CaseAssessment& original,
                                    const RubricWeights& weights, int tune_step) {
  RubricWeights out = weights;
  if (tune_step == 0 || fb.polarity != Polarity::Negative) return out;
  if (original.label != TriageLabel::Likely || original.points != weights.likely_threshold) return out;
  out.likely_threshold = std::clamp(weights.likely_threshold + tune_step, kMinThreshold, kMaxThreshold);
  out.possible_threshold = std::min(out.possible_threshold, out.likely_threshold);
  return out;
}

}  // namespace smsroute
