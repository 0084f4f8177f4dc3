#include <algorithm>
#include <numbers>
#include <random>

#include "doctest.h"
#include "smsroute/oracles.hpp"
#include "smsroute/triage.hpp"
#include "support.hpp"

using namespace smsroute;

namespace {
SymptomReport with(SymptomSet s, EpiFlagSet e = {}) {
  SymptomReport r;
  r.symptoms = s;
  r.epi_flags = e;
  return r;
}
const Timestamp kNow = testing::at("2014-10-20T12:00:00Z");

LocationEstimate at_point(GeoPoint p) { return {p, 10.0, LocationSource::Village}; }

// Point `km` east of `p` along its parallel (good enough at these scales).
GeoPoint east_of(GeoPoint p, double km) {
  return GeoPoint(p.lat(), p.lon() + km / (111.195 * std::cos(p.lat() * std::numbers::pi / 180.0)));
}
}  // namespace

TEST_CASE("rubric examples") {
  const RubricWeights w;
  auto a = score_report(with({}), false, w, kNow);
  CHECK(a.points == 0);
  CHECK(a.label == TriageLabel::Unlikely);

  a = score_report(with({Symptom::Fever, Symptom::Vomiting, Symptom::Diarrhea, Symptom::Headache}), false, w, kNow);
  CHECK(a.points == 5);
  CHECK(a.label == TriageLabel::Likely);
  CHECK(a.score == doctest::Approx(0.5));

  a = score_report(with({Symptom::Hemorrhage, Symptom::Vomiting}), false, w, kNow);
  CHECK(a.points == 3);
  CHECK(a.label == TriageLabel::Possible);

  // Fever gate: many points, no fever.
  a = score_report(with({Symptom::Hemorrhage, Symptom::Vomiting, Symptom::Diarrhea, Symptom::Weakness},
                        {EpiFlag::Funeral, EpiFlag::Contact}),
                   true, w, kNow);
  CHECK(a.points == 2 + 1 + 1 + 1 + 2 + 1);
  CHECK(a.label == TriageLabel::Possible);
}

TEST_CASE("spatial prior window and radius") {
  const PriorParams params;
  const GeoPoint here(8.5, -10.1);
  CaseHistory h(params.incubation_days);
  CHECK_FALSE(spatial_prior(at_point(here), h, kNow, params));

  for (int i = 0; i < 3; ++i)
    h.add({TriageLabel::Likely, east_of(here, 5.0), kNow - std::chrono::days{2}});
  CHECK(spatial_prior(at_point(here), h, kNow, params));
  CHECK_FALSE(spatial_prior(LocationEstimate{}, h, kNow, params));
  CHECK_FALSE(spatial_prior(at_point(east_of(here, 40.0)), h, kNow, params));

  CaseHistory old(params.incubation_days);
  for (int i = 0; i < 3; ++i) old.add({TriageLabel::Likely, here, kNow - std::chrono::days{25}});
  CHECK_FALSE(spatial_prior(at_point(here), old, kNow, params));

  CaseHistory mixed(params.incubation_days);
  for (int i = 0; i < 2; ++i) mixed.add({TriageLabel::Likely, here, kNow - std::chrono::days{1}});
  for (int i = 0; i < 5; ++i) mixed.add({TriageLabel::Possible, here, kNow - std::chrono::days{1}});
  CHECK_FALSE(spatial_prior(at_point(here), mixed, kNow, params));
}

TEST_CASE("spatial prior count matches a brute-force scan") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> lat(7.0, 9.0), lon(-11.0, -9.0), age(0.0, 30.0);
  const PriorParams params;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CaseHistory::Entry> entries;
    for (int i = 0; i < 60; ++i)
      entries.push_back({gen() % 3 == 0 ? TriageLabel::Possible : TriageLabel::Likely, GeoPoint(lat(gen), lon(gen)),
                         kNow - std::chrono::seconds(static_cast<long>(age(gen) * 86400))});
    std::sort(entries.begin(), entries.end(), [](auto& a, auto& b) { return a.at < b.at; });
    CaseHistory h(params.incubation_days);
    for (const auto& e : entries) h.add(e);
    const GeoPoint q(lat(gen), lon(gen));
    int brute = 0;
    for (const auto& e : entries) {
      const double days = static_cast<double>(to_epoch(kNow) - to_epoch(e.at)) / 86400.0;
      if (e.label == TriageLabel::Likely && days >= 0 && days <= params.incubation_days &&
          oracle::great_circle_km(q.lat(), q.lon(), e.point->lat(), e.point->lon()) <= params.radius_km)
        ++brute;
    }
    CHECK(h.count_likely_near(q, params.radius_km, kNow, 1000) == brute);
    CHECK(spatial_prior(at_point(q), h, kNow, params) == (brute >= params.min_cases));
  }
}

TEST_CASE("assess records into history") {
  CaseHistory h;
  const RubricWeights w;
  const auto a = assess(with({Symptom::Fever, Symptom::Hemorrhage, Symptom::Vomiting}), at_point(GeoPoint(8, -10)),
                        h, w, kNow);
  CHECK(a.label == TriageLabel::Likely);
  REQUIRE(h.entries().size() == 1);
  CHECK(h.entries().front().label == TriageLabel::Likely);
}

TEST_CASE("feedback tuning") {
  const RubricWeights w;
  CaseAssessment boundary;
  boundary.label = TriageLabel::Likely;
  boundary.points = w.likely_threshold;
  const Feedback no{"A3F2K9", Polarity::Negative}, yes{"A3F2K9", Polarity::Positive};

  CHECK(apply_feedback_tuning(no, boundary, w, 0) == w);
  CHECK(apply_feedback_tuning(no, boundary, w, 1).likely_threshold == 6);
  CHECK(apply_feedback_tuning(yes, boundary, w, 1) == w);

  CaseAssessment clear = boundary;
  clear.points = 7;
  CHECK(apply_feedback_tuning(no, clear, w, 1) == w);

  RubricWeights top = w;
  top.likely_threshold = 8;
  boundary.points = 8;
  CHECK(apply_feedback_tuning(no, boundary, top, 1) == top);
}

TEST_CASE("labels round trip") {
  for (auto l : {TriageLabel::Likely, TriageLabel::Possible, TriageLabel::Unlikely})
    CHECK(parse_label(to_string(l)) == l);
  CHECK_FALSE(parse_label("MAYBE"));
}
