#include <numbers>
#include <set>

#include "doctest.h"
#include "smsroute/recommender.hpp"
#include "support.hpp"

using namespace smsroute;

namespace {
const Timestamp t0 = testing::at("2014-10-20T08:00:00Z");
const GeoPoint patient(8.0, -10.0);

// Point `km` north of the patient.
GeoPoint north(double km) { return GeoPoint(patient.lat() + km / (kEarthRadiusKm * std::numbers::pi / 180.0), patient.lon()); }

void add(FacilityRegistry& r, const std::string& code, GeoPoint p, CapabilitySet caps = {Capability::Isolation},
         const std::string& contact = "+231770000001") {
  r.add_facility(Facility{code, "Clinic " + code, p, contact, caps, capacity::Available{}}, t0);
}

CaseAssessment likely() {
  CaseAssessment a;
  a.label = TriageLabel::Likely;
  a.points = 6;
  a.score = 0.6;
  return a;
}

LocationEstimate here() { return {patient, 10.0, LocationSource::Village}; }

const Recommendation& rec_of(const RecommendOutcome& o) {
  if (const auto* r = std::get_if<Routed>(&o)) return r->rec;
  return std::get<NoFacility>(o).rec;
}
}  // namespace

TEST_CASE("correlation codes") {
  const auto c = correlation_code(0x5eed, 0);
  CHECK(c.size() == 6);
  CHECK(is_feedback_code(c));
  CHECK(correlation_code(0x5eed, 0) == c);
  std::set<std::string> seen;
  for (std::uint64_t i = 0; i < 2000; ++i) seen.insert(correlation_code(0x5eed, i));
  CHECK(seen.size() > 1990);
}

TEST_CASE("nearest eligible facility wins") {
  FacilityRegistry reg;
  add(reg, "C", north(30));
  add(reg, "A", north(5));
  add(reg, "B", north(12));
  Recommender rec;
  const auto out = rec.recommend(likely(), here(), "+22462000001", reg, t0);
  REQUIRE(std::holds_alternative<Routed>(out));
  CHECK(rec_of(out).facility_code == "A");
  CHECK(rec_of(out).distance_km == doctest::Approx(5.0).epsilon(1e-9));

  FacilityRegistry one;
  add(one, "ONLY", north(50));
  CHECK(rec_of(Recommender{}.recommend(likely(), here(), "+22462000001", one, t0)).facility_code == "ONLY");
}

TEST_CASE("equidistant facilities go to the smaller code") {
  FacilityRegistry reg;
  add(reg, "ZED", north(7));
  add(reg, "ALF", north(7));
  add(reg, "MID", north(7));
  CHECK(rec_of(Recommender{}.recommend(likely(), here(), "+22462000001", reg, t0)).facility_code == "ALF");
}

TEST_CASE("no location and no facility outcomes") {
  FacilityRegistry reg;
  add(reg, "GEN", north(3), {Capability::General});
  Recommender rec;
  CHECK(std::holds_alternative<NoLocation>(rec.recommend(likely(), {}, "+22462000001", reg, t0)));
  const auto out = rec.recommend(likely(), here(), "+22462000001", reg, t0);
  REQUIRE(std::holds_alternative<NoFacility>(out));
  CHECK(rec_of(out).facility_code == "GEN");
  CHECK_FALSE(rec_of(out).capacity_checked);

  FacilityRegistry empty;
  const auto none = rec.recommend(likely(), here(), "+22462000001", empty, t0);
  REQUIRE(std::holds_alternative<NoFacility>(none));
  CHECK(rec_of(none).facility_code.empty());
  CHECK(compose_patient_reply(none, "", "+22462000001").body ==
        "EBOLA RISK LIKELY. NO CLINIC KNOWN NEAR YOU. CALL A HEALTH WORKER. REF " + rec_of(none).code);
}

TEST_CASE("reply templates") {
  Recommendation r;
  r.code = "A3F2K9";
  r.label = TriageLabel::Likely;
  r.distance_km = 7.3;
  r.facility_code = "ETU01";
  r.capacity_checked = true;
  const auto msg = compose_patient_reply(Routed{r}, "Kindia ETU", "+22462000001", 4);
  CHECK(msg.body == "EBOLA RISK LIKELY. GO TO KINDIA ETU 7KM. REF A3F2K9. REPLY YES A3F2K9 OR NO A3F2K9");
  CHECK(msg.body.size() == 82);
  CHECK(msg.in_reply_to == 4u);

  CHECK(compose_patient_reply(NoLocation{}, "", "+22462000001").body == "SEND VILLAGE NAME TO GET NEAREST CLINIC");

  const auto long_name = compose_patient_reply(Routed{r}, std::string(200, 'x'), "+22462000001");
  CHECK(long_name.body.size() <= 160);
  CHECK(is_reply_text(long_name.body));
  CHECK(long_name.body.find("REF A3F2K9. REPLY YES A3F2K9 OR NO A3F2K9") != std::string::npos);

  const auto odd = compose_patient_reply(Routed{r}, "Clínica São José | Ward #3", "+22462000001");
  CHECK(is_reply_text(odd.body));

  Facility f{"ETU01", "Kindia ETU", GeoPoint(10, -12), "+224620000001", {Capability::Isolation}, capacity::Available{}};
  const auto alert = compose_facility_alert(r, &f);
  REQUIRE(alert);
  CHECK(alert->body == "ALERT A3F2K9. LIKELY CASE EN ROUTE. 7KM AWAY.");
  CHECK(alert->msisdn == "+224620000001");
  CHECK_FALSE(alert->in_reply_to);

  r.label = TriageLabel::Unlikely;
  CHECK_FALSE(compose_facility_alert(r, &f));
  r.label = TriageLabel::Possible;
  f.contact_msisdn.clear();
  CHECK_FALSE(compose_facility_alert(r, &f));
}

TEST_CASE("fixed reply texts stay inside the reply alphabet") {
  for (auto s : {reply_text::kHelp, reply_text::kNoLocation, reply_text::kUnknownRef, reply_text::kBadUpdate})
    CHECK(is_reply_text(s));
  CHECK(is_reply_text(reply_text::thanks("A3F2K9")));
  CHECK(is_reply_text(reply_text::chain_closed("A3F2K9")));
  CHECK(is_reply_text(reply_text::unknown_facility("")));
  CHECK(is_reply_text(reply_text::update_confirmation("ETU01", capacity::Reported{3, t0}, GeoPoint(8.5, -10.25))));
}

TEST_CASE("negative feedback reroutes within the episode") {
  FacilityRegistry reg;
  add(reg, "A", north(5));
  add(reg, "B", north(10));
  add(reg, "C", north(20));
  Recommender rec({0x5eed, 3});
  const std::string who = "+22462000001";
  const auto first = rec_of(rec.recommend(likely(), here(), who, reg, t0));
  CHECK(first.facility_code == "A");

  CHECK_THROWS_AS(rec.handle_feedback({first.code, Polarity::Negative}, "+22462009999", reg, t0), UnknownCode);
  CHECK_THROWS_AS(rec.handle_feedback({"ZZZZZZ", Polarity::Negative}, who, reg, t0), UnknownCode);

  auto res = rec.handle_feedback({first.code, Polarity::Negative}, who, reg, t0);
  REQUIRE(res.reroute);
  CHECK(res.original.status == RecommendationStatus::Rerouted);
  CHECK(std::holds_alternative<capacity::PresumedFull>(reg.find("A")->capacity));
  const auto second = rec_of(*res.reroute);
  CHECK(second.facility_code == "B");
  CHECK(second.episode == first.episode);

  CHECK_THROWS_AS(rec.handle_feedback({first.code, Polarity::Negative}, who, reg, t0), DuplicateFeedback);

  // A recovers, but stays excluded for this patient.
  reg.apply_feedback({"QQQQQQ", Polarity::Positive}, [] {
    Recommendation r;
    r.code = "QQQQQQ";
    r.facility_code = "A";
    return r;
  }(), t0);
  res = rec.handle_feedback({second.code, Polarity::Negative}, who, reg, t0);
  const auto third = rec_of(*res.reroute);
  CHECK(third.facility_code == "C");

  res = rec.handle_feedback({third.code, Polarity::Negative}, who, reg, t0);
  REQUIRE(res.reroute);
  CHECK(std::holds_alternative<NoFacility>(*res.reroute));
  const auto fourth = rec_of(*res.reroute);

  res = rec.handle_feedback({fourth.code, Polarity::Negative}, who, reg, t0);
  CHECK(res.chain_exhausted);
  CHECK_FALSE(res.reroute);
}

TEST_CASE("positive feedback confirms") {
  FacilityRegistry reg;
  add(reg, "A", north(5));
  reg.apply_facility_update({"A", 3, std::nullopt}, t0);
  Recommender rec;
  const auto r = rec_of(rec.recommend(likely(), here(), "+22462000001", reg, t0));
  CHECK(reg.find("A")->capacity == CapacityState{capacity::Reported{2, t0}});
  const auto res = rec.handle_feedback({r.code, Polarity::Positive}, "+22462000001", reg, t0);
  CHECK(res.original.status == RecommendationStatus::Confirmed);
  CHECK_FALSE(res.reroute);
  CHECK(std::holds_alternative<capacity::Available>(reg.find("A")->capacity));
}

TEST_CASE("recommender state folds from its events") {
  std::vector<Event> log;
  FacilityRegistry reg;
  reg.set_sink([&](const Event& e) { log.push_back(e); });
  add(reg, "A", north(5));
  add(reg, "B", north(9));
  Recommender rec;
  rec.set_sink([&](const Event& e) { log.push_back(e); });
  const auto r1 = rec_of(rec.recommend(likely(), here(), "+22462000001", reg, t0));
  rec.recommend(likely(), here(), "+22462000002", reg, t0);
  rec.handle_feedback({r1.code, Polarity::Negative}, "+22462000001", reg, t0);

  FacilityRegistry reg2;
  Recommender rec2;
  for (const auto& e : log) CHECK((reg2.apply(e) || rec2.apply(e)));
  CHECK(rec2.to_json() == rec.to_json());
  CHECK(reg2.to_json() == reg.to_json());
  CHECK(rec2.counter() == rec.counter());
}
