#include "smsroute/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "smsroute/random.hpp"

namespace smsroute {

namespace {

constexpr std::string_view kBase32 = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";

std::string km(double distance_km) { return std::to_string(std::lround(distance_km)) + "KM"; }

// Fills `template_text` where `{}` marks the name, truncating the name so the
// whole message fits in 160 characters.
std::string fit_name(std::string_view before, std::string name, std::string_view after) {
  const std::size_t fixed = before.size() + after.size();
  const std::size_t room = fixed >= kMaxReplyLength ? 0 : kMaxReplyLength - fixed;
  if (name.size() > room) name.resize(room);
  while (!name.empty() && name.back() == ' ') name.pop_back();
  std::string out;
  out.reserve(fixed + name.size());
  out.append(before).append(name).append(after);
  return out;
}

std::string clip(std::string s) {
  if (s.size() > kMaxReplyLength) s.resize(kMaxReplyLength);
  return s;
}

Event make_event(EventKind kind, Timestamp at, nlohmann::json data) {
  Event e;
  e.kind = kind;
  e.at = at;
  e.data = std::move(data);
  return e;
}

}  // namespace

std::string correlation_code(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t bits = mix64(seed ^ mix64(counter + 0x9e3779b97f4a7c15ULL));
  std::string code(6, 'A');
  for (auto& c : code) {
    c = kBase32[bits & 31u];
    bits >>= 5;
  }
  return code;
}

std::string reply_safe(std::string_view text) {
  std::string out;
  for (const auto& token : normalize(text)) {
    if (!out.empty()) out += ' ';
    for (char c : token) {
      const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      out += is_reply_char(u) ? u : ' ';
    }
  }
  return out;
}

nlohmann::json recommendation_to_json(const Recommendation& r) {
  return {{"ref", r.code},
          {"msisdn", r.patient_msisdn},
          {"facility", r.facility_code},
          {"distance_km", r.distance_km},
          {"label", to_string(r.label)},
          {"points", r.points},
          {"issued_at", to_epoch(r.issued_at)},
          {"status", to_string(r.status)},
          {"episode", r.episode},
          {"lat", r.patient_point.lat()},
          {"lon", r.patient_point.lon()},
          {"capacity_checked", r.capacity_checked}};
}

Recommendation recommendation_from_json(const nlohmann::json& j) {
  Recommendation r;
  r.code = j.at("ref").get<std::string>();
  r.patient_msisdn = j.at("msisdn").get<std::string>();
  r.facility_code = j.at("facility").get<std::string>();
  r.distance_km = j.at("distance_km").get<double>();
  r.label = parse_label(j.at("label").get<std::string>()).value();
  r.points = j.at("points").get<int>();
  r.issued_at = from_epoch(j.at("issued_at").get<std::int64_t>());
  r.status = parse_recommendation_status(j.at("status").get<std::string>()).value();
  r.episode = j.at("episode").get<std::string>();
  r.patient_point = GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>());
  r.capacity_checked = j.at("capacity_checked").get<bool>();
  return r;
}

std::string_view to_string(RecommendationStatus s) {
  switch (s) {
    case RecommendationStatus::Open: return "OPEN";
    case RecommendationStatus::Confirmed: return "CONFIRMED";
    case RecommendationStatus::Rejected: return "REJECTED";
    case RecommendationStatus::Rerouted: return "REROUTED";
  }
  return "OPEN";
}

std::optional<RecommendationStatus> parse_recommendation_status(std::string_view s) {
  for (auto st : {RecommendationStatus::Open, RecommendationStatus::Confirmed, RecommendationStatus::Rejected,
                  RecommendationStatus::Rerouted})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

void Recommender::emit(Event e) {
  apply(e);
  if (sink_) sink_(e);
}

const Recommendation* Recommender::find(const std::string& code) const {
  const auto it = recs_.find(code);
  return it == recs_.end() ? nullptr : &it->second;
}

void Recommender::set_status(const std::string& code, RecommendationStatus status, Timestamp now) {
  emit(make_event(EventKind::RecommendationStatus, now, {{"ref", code}, {"status", to_string(status)}}));
}

RecommendOutcome Recommender::recommend(const CaseAssessment& assessment, const LocationEstimate& loc,
                                        const std::string& patient_msisdn, FacilityRegistry& registry,
                                        Timestamp now) {
  if (!loc.point) return NoLocation{};
  return route(assessment.label, assessment.points, *loc.point, patient_msisdn, registry, now, {}, {});
}

RecommendOutcome Recommender::route(TriageLabel label, int points, const GeoPoint& point,
                                    const std::string& msisdn, FacilityRegistry& registry, Timestamp now,
                                    const std::string& episode, const std::set<std::string>& excluded) {
  const Facility* best = nullptr;
  double best_km = std::numeric_limits<double>::infinity();
  for (const Facility* f : registry.eligible(label, now)) {
    if (excluded.count(f->code)) continue;
    const double d = haversine_km(point, f->point);
    if (d < best_km) {  // eligible() is ordered by code, so ties keep the smaller code
      best_km = d;
      best = f;
    }
  }
  const bool routed = best != nullptr;
  if (!routed) {
    // Fallback: nearest facility that could take the case, then any facility,
    // preferring ones the patient has not already been turned away from.
    auto nearest = [&](auto&& keep) {
      const Facility* pick = nullptr;
      double pick_km = std::numeric_limits<double>::infinity();
      for (const auto& [code, f] : registry.facilities()) {
        if (!keep(f)) continue;
        const double d = haversine_km(point, f.point);
        if (d < pick_km) {
          pick_km = d;
          pick = &f;
        }
      }
      return std::pair{pick, pick_km};
    };
    const auto fresh = [&](const Facility& f) { return !excluded.count(f.code); };
    for (const auto& keep : std::vector<std::function<bool(const Facility&)>>{
             [&](const Facility& f) { return fresh(f) && admits(f.capabilities, label); },
             fresh, [](const Facility&) { return true; }}) {
      std::tie(best, best_km) = nearest(keep);
      if (best) break;
    }
  }

  // Mint a code not used by any earlier recommendation.
  std::uint64_t counter = counter_;
  std::string code;
  do {
    code = correlation_code(params_.code_seed, counter++);
  } while (recs_.count(code));

  Recommendation rec;
  rec.code = code;
  rec.patient_msisdn = msisdn;
  rec.facility_code = best ? best->code : std::string{};
  rec.distance_km = best ? best_km : 0.0;
  rec.label = label;
  rec.points = points;
  rec.issued_at = now;
  rec.status = RecommendationStatus::Open;
  rec.episode = episode.empty() ? code : episode;
  rec.patient_point = point;
  rec.capacity_checked = routed;

  auto data = recommendation_to_json(rec);
  data["counter"] = counter;
  emit(make_event(EventKind::Recommendation, now, std::move(data)));
  if (routed) {
    registry.on_recommendation(rec.facility_code, rec.code, now);
    return Routed{rec};
  }
  return NoFacility{rec};
}

FeedbackResult Recommender::handle_feedback(const Feedback& fb, const std::string& sender,
                                            FacilityRegistry& registry, Timestamp now) {
  const auto it = recs_.find(fb.code);
  if (it == recs_.end() || it->second.patient_msisdn != sender) throw UnknownCode("unknown ref " + fb.code);
  const Recommendation rec = it->second;
  if (rec.status != RecommendationStatus::Open) throw DuplicateFeedback("feedback already received for " + rec.code);

  if (rec.capacity_checked) registry.apply_feedback(fb, rec, now);

  FeedbackResult result;
  if (fb.polarity == Polarity::Positive) {
    set_status(rec.code, RecommendationStatus::Confirmed, now);
    result.original = recs_.at(rec.code);
    return result;
  }

  const auto& chain = episodes_.at(rec.episode);
  const int reroutes = static_cast<int>(chain.size()) - 1;
  if (reroutes >= params_.feedback_chain_max) {
    set_status(rec.code, RecommendationStatus::Rejected, now);
    result.original = recs_.at(rec.code);
    result.chain_exhausted = true;
    return result;
  }
  std::set<std::string> excluded;
  for (const auto& code : chain) {
    const auto& prior = recs_.at(code);
    if (!prior.facility_code.empty()) excluded.insert(prior.facility_code);
  }
  const std::string episode = rec.episode;
  auto outcome = route(rec.label, rec.points, rec.patient_point, rec.patient_msisdn, registry, now, episode, excluded);
  set_status(rec.code, std::holds_alternative<Routed>(outcome) ? RecommendationStatus::Rerouted
                                                                : RecommendationStatus::Rejected,
             now);
  result.original = recs_.at(rec.code);
  result.reroute = std::move(outcome);
  return result;
}

bool Recommender::apply(const Event& e) {
  switch (e.kind) {
    case EventKind::Recommendation: {
      auto rec = recommendation_from_json(e.data);
      counter_ = e.data.at("counter").get<std::uint64_t>();
      episodes_[rec.episode].push_back(rec.code);
      const std::string code = rec.code;
      recs_.insert_or_assign(code, std::move(rec));
      return true;
    }
    case EventKind::RecommendationStatus: {
      auto& rec = recs_.at(e.data.at("ref").get<std::string>());
      rec.status = parse_recommendation_status(e.data.at("status").get<std::string>()).value();
      return true;
    }
    default:
      return false;
  }
}

nlohmann::json Recommender::to_json() const {
  nlohmann::json recs = nlohmann::json::object();
  for (const auto& [code, r] : recs_) recs[code] = recommendation_to_json(r);
  nlohmann::json episodes = nlohmann::json::object();
  for (const auto& [ep, codes] : episodes_) episodes[ep] = codes;
  return {{"counter", counter_}, {"recommendations", recs}, {"episodes", episodes}};
}

void Recommender::load_json(const nlohmann::json& j) {
  counter_ = j.at("counter").get<std::uint64_t>();
  recs_.clear();
  episodes_.clear();
  for (const auto& [code, r] : j.at("recommendations").items()) recs_.emplace(code, recommendation_from_json(r));
  for (const auto& [ep, codes] : j.at("episodes").items())
    episodes_.emplace(ep, codes.get<std::vector<std::string>>());
}

OutboundMessage compose_patient_reply(const RecommendOutcome& outcome, const std::string& facility_name,
                                      const std::string& patient_msisdn, std::optional<std::uint64_t> in_reply_to) {
  OutboundMessage msg{patient_msisdn, {}, in_reply_to};
  const std::string name = reply_safe(facility_name);
  if (std::holds_alternative<NoLocation>(outcome)) {
    msg.body = std::string(reply_text::kNoLocation);
  } else if (const auto* r = std::get_if<Routed>(&outcome)) {
    const auto& rec = r->rec;
    const std::string shown = name.empty() ? reply_safe(rec.facility_code) : name;
    msg.body = fit_name("EBOLA RISK " + std::string(to_string(rec.label)) + ". GO TO ", shown,
                        " " + km(rec.distance_km) + ". REF " + rec.code + ". REPLY YES " + rec.code + " OR NO " +
                            rec.code);
  } else {
    const auto& rec = std::get<NoFacility>(outcome).rec;
    const std::string head = "EBOLA RISK " + std::string(to_string(rec.label)) + ". ";
    if (rec.facility_code.empty()) {
      msg.body = head + "NO CLINIC KNOWN NEAR YOU. CALL A HEALTH WORKER. REF " + rec.code;
    } else {
      const std::string shown = name.empty() ? reply_safe(rec.facility_code) : name;
      msg.body = fit_name(head + "ALL CLINICS FULL. CALL FIRST: ", shown,
                          " " + km(rec.distance_km) + ". REF " + rec.code + ". REPLY NO " + rec.code + " TO RETRY");
    }
  }
  msg.body = clip(std::move(msg.body));
  return msg;
}

std::optional<OutboundMessage> compose_facility_alert(const Recommendation& rec, const Facility* facility) {
  if (rec.label == TriageLabel::Unlikely || !rec.capacity_checked) return std::nullopt;
  if (!facility || facility->contact_msisdn.empty()) return std::nullopt;
  return OutboundMessage{facility->contact_msisdn,
                         "ALERT " + rec.code + ". " + std::string(to_string(rec.label)) + " CASE EN ROUTE. " +
                             km(rec.distance_km) + " AWAY.",
                         std::nullopt};
}

namespace reply_text {

namespace {
std::string code_part(const std::string& code) {
  std::string c = reply_safe(code);
  if (c.size() > 40) c.resize(40);
  return c;
}
}  // namespace

std::string thanks(const std::string& code) { return "THANK YOU. REF " + code_part(code) + " CONFIRMED"; }
std::string already_received(const std::string& code) { return "REF " + code_part(code) + " ALREADY RECEIVED"; }
std::string chain_closed(const std::string& code) {
  return "REF " + code_part(code) + " CLOSED. NO OTHER CLINIC FOUND. CALL A HEALTH WORKER";
}
std::string unknown_facility(const std::string& code) {
  if (code.empty()) return "UNKNOWN FACILITY. SEND: FAC CODE BEDS NUMBER";
  return "UNKNOWN FACILITY " + code_part(code);
}

std::string update_confirmation(const std::string& code, const CapacityState& state,
                                const std::optional<GeoPoint>& moved_to) {
  std::string out = "UPDATED " + code_part(code) + ".";
  if (const auto* r = std::get_if<capacity::Reported>(&state)) {
    out += " BEDS " + std::to_string(r->beds_anticipated) + ".";
  } else if (std::holds_alternative<capacity::PresumedFull>(state)) {
    out += " FULL.";
  }
  if (moved_to) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " LOCATION %.5f %.5f.", moved_to->lat(), moved_to->lon());
    out += buf;
  }
  return out;
}

}  // namespace reply_text

}  // namespace smsroute
