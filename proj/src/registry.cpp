#include "smsroute/registry.hpp"
#include "smsroute/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <iostream>
#include <sstream>

#include "smsroute/wire.hpp"

namespace smsroute {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(s);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::string> facility_code(const std::string& raw) {
  if (raw.empty()) return std::nullopt;
  std::string code;
  for (char c : raw) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return std::nullopt;
    code += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return code;
}

std::optional<Capability> parse_capability(const std::string& s) {
  if (s == "ISOLATION") return Capability::Isolation;
  if (s == "GENERAL") return Capability::General;
  return std::nullopt;
}

Event make_event(EventKind kind, Timestamp at, nlohmann::json data) {
  Event e;
  e.kind = kind;
  e.at = at;
  e.data = std::move(data);
  return e;
}

}  // namespace

std::string_view to_string(Capability c) { return c == Capability::Isolation ? "ISOLATION" : "GENERAL"; }

std::string describe(const CapacityState& s) {
  if (std::holds_alternative<capacity::Available>(s)) return "AVAILABLE";
  if (const auto* f = std::get_if<capacity::PresumedFull>(&s))
    return "PRESUMED_FULL(since " + format_iso8601(f->since) + ")";
  const auto& r = std::get<capacity::Reported>(s);
  return "REPORTED(" + std::to_string(r.beds_anticipated) + " at " + format_iso8601(r.at) + ")";
}

bool admits(const CapabilitySet& caps, TriageLabel label) {
  if (label == TriageLabel::Unlikely) return !caps.empty();
  return caps.contains(Capability::Isolation);
}

nlohmann::json capacity_to_json(const CapacityState& s) {
  if (std::holds_alternative<capacity::Available>(s)) return {{"state", "AVAILABLE"}};
  if (const auto* f = std::get_if<capacity::PresumedFull>(&s))
    return {{"state", "PRESUMED_FULL"}, {"since", to_epoch(f->since)}};
  const auto& r = std::get<capacity::Reported>(s);
  return {{"state", "REPORTED"}, {"beds", r.beds_anticipated}, {"at", to_epoch(r.at)}};
}

CapacityState capacity_from_json(const nlohmann::json& j) {
  const auto state = j.at("state").get<std::string>();
  if (state == "AVAILABLE") return capacity::Available{};
  if (state == "PRESUMED_FULL") return capacity::PresumedFull{from_epoch(j.at("since").get<std::int64_t>())};
  if (state == "REPORTED")
    return capacity::Reported{j.at("beds").get<long>(), from_epoch(j.at("at").get<std::int64_t>())};
  throw std::runtime_error("unknown capacity state " + state);
}

void FacilityRegistry::emit(Event e) {
  apply(e);
  if (sink_) sink_(e);
}

Facility& FacilityRegistry::at(const std::string& code) {
  const auto it = facilities_.find(code);
  if (it == facilities_.end()) throw UnknownFacility(code);
  return it->second;
}

const Facility* FacilityRegistry::find(const std::string& code) const {
  const auto it = facilities_.find(code);
  return it == facilities_.end() ? nullptr : &it->second;
}

const Facility* FacilityRegistry::find_by_contact(const std::string& msisdn) const {
  for (const auto& [code, f] : facilities_)
    if (!f.contact_msisdn.empty() && f.contact_msisdn == msisdn) return &f;
  return nullptr;
}

void FacilityRegistry::add_facility(const Facility& f, Timestamp now) {
  nlohmann::json caps = nlohmann::json::array();
  for (auto c : f.capabilities.items()) caps.push_back(to_string(c));
  emit(make_event(EventKind::SeedImport, now,
                  {{"facility", f.code},
                   {"name", f.name},
                   {"lat", f.point.lat()},
                   {"lon", f.point.lon()},
                   {"contact", f.contact_msisdn},
                   {"capabilities", caps}}));
}

std::size_t FacilityRegistry::import_seed(const std::filesystem::path& path, Timestamp now, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  LoadStats local;
  std::map<std::string, Facility> rows;
  std::vector<std::string> order;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto f = split(line, ',');
    if (line_no == 1 && f.size() >= 3 && !parse_double(f[2])) continue;  // header
    std::optional<Facility> fac;
    if (f.size() == 6) {
      const auto code = facility_code(f[0]);
      const auto lat = parse_double(f[2]);
      const auto lon = parse_double(f[3]);
      CapabilitySet caps;
      bool caps_ok = true;
      for (const auto& c : split(f[5], ';')) {
        if (c.empty()) continue;
        if (auto cap = parse_capability(c)) caps.insert(*cap);
        else caps_ok = false;
      }
      const bool contact_ok = f[4].empty() || is_valid_msisdn(f[4]);
      if (code && lat && lon && GeoPoint::valid(*lat, *lon) && caps_ok && !caps.empty() && contact_ok)
        fac = Facility{*code, f[1], GeoPoint(*lat, *lon), f[4], caps, capacity::Available{}};
    }
    if (!fac) {
      ++local.malformed;
      std::clog << path.string() << ":" << line_no << ": malformed facility row skipped\n";
      continue;
    }
    if (rows.count(fac->code)) {
      ++local.duplicates;
      std::clog << path.string() << ":" << line_no << ": duplicate facility " << fac->code << ", last wins\n";
    } else {
      order.push_back(fac->code);
    }
    rows.insert_or_assign(fac->code, *fac);
    ++local.rows;
  }
  for (const auto& code : order) add_facility(rows.at(code), now);
  if (stats) *stats = local;
  return order.size();
}

CapacityState FacilityRegistry::apply_facility_update(const FacilityUpdate& u, Timestamp now) {
  at(u.facility_code);  // throws UnknownFacility
  nlohmann::json data{{"facility", u.facility_code}};
  if (u.beds_available) data["beds"] = *u.beds_available;
  if (u.new_location) {
    data["lat"] = u.new_location->lat();
    data["lon"] = u.new_location->lon();
  }
  emit(make_event(EventKind::FacilityUpdate, now, std::move(data)));
  return at(u.facility_code).capacity;
}

CapacityState FacilityRegistry::apply_feedback(const Feedback& fb, const Recommendation& rec, Timestamp now) {
  if (fb.code != rec.code) throw UnknownCode("feedback code does not match recommendation");
  if (rec.status != RecommendationStatus::Open) throw DuplicateFeedback("feedback already received for " + rec.code);
  at(rec.facility_code);
  emit(make_event(fb.polarity == Polarity::Positive ? EventKind::FeedbackPositive : EventKind::FeedbackNegative,
                  now, {{"facility", rec.facility_code}, {"ref", rec.code}}));
  return at(rec.facility_code).capacity;
}

CapacityState FacilityRegistry::on_recommendation(const std::string& code, const std::string& ref, Timestamp now) {
  at(code);
  emit(make_event(EventKind::RecommendationIssued, now, {{"facility", code}, {"ref", ref}}));
  return at(code).capacity;
}

CapacityState FacilityRegistry::peek_state(const Facility& f, Timestamp now) const {
  if (const auto* full = std::get_if<capacity::PresumedFull>(&f.capacity)) {
    if (now >= full->since + params_.ttl) return capacity::Available{};
  }
  return f.capacity;
}

CapacityState FacilityRegistry::effective_state(const std::string& code, Timestamp now) {
  const Facility& f = at(code);
  auto state = peek_state(f, now);
  if (std::holds_alternative<capacity::PresumedFull>(f.capacity) &&
      std::holds_alternative<capacity::Available>(state)) {
    emit(make_event(EventKind::StateExpired, now, {{"facility", code}}));
  }
  return state;
}

std::vector<const Facility*> FacilityRegistry::eligible(TriageLabel label, Timestamp now) {
  std::vector<const Facility*> out;
  for (auto& [code, f] : facilities_) {
    if (!admits(f.capabilities, label)) continue;
    if (std::holds_alternative<capacity::PresumedFull>(effective_state(code, now))) continue;
    out.push_back(&f);
  }
  return out;
}

bool FacilityRegistry::apply(const Event& e) {
  switch (e.kind) {
    case EventKind::SeedImport: {
      const auto& d = e.data;
      Facility f;
      f.code = d.at("facility").get<std::string>();
      f.name = d.at("name").get<std::string>();
      f.point = GeoPoint(d.at("lat").get<double>(), d.at("lon").get<double>());
      f.contact_msisdn = d.at("contact").get<std::string>();
      for (const auto& c : d.at("capabilities"))
        if (auto cap = parse_capability(c.get<std::string>())) f.capabilities.insert(*cap);
      facilities_.insert_or_assign(f.code, std::move(f));
      return true;
    }
    case EventKind::FacilityUpdate: {
      Facility& f = at(e.data.at("facility").get<std::string>());
      if (e.data.contains("beds")) {
        const long beds = e.data.at("beds").get<long>();
        if (beds > 0) f.capacity = capacity::Reported{beds, e.at};
        else f.capacity = capacity::PresumedFull{e.at};
      }
      if (e.data.contains("lat")) f.point = GeoPoint(e.data.at("lat").get<double>(), e.data.at("lon").get<double>());
      return true;
    }
    case EventKind::FeedbackPositive:
      at(e.data.at("facility").get<std::string>()).capacity = capacity::Available{};
      return true;
    case EventKind::FeedbackNegative:
      at(e.data.at("facility").get<std::string>()).capacity = capacity::PresumedFull{e.at};
      return true;
    case EventKind::RecommendationIssued: {
      Facility& f = at(e.data.at("facility").get<std::string>());
      if (auto* r = std::get_if<capacity::Reported>(&f.capacity)) {
        if (r->beds_anticipated <= 1) f.capacity = capacity::PresumedFull{e.at};
        else --r->beds_anticipated;
      }
      return true;
    }
    case EventKind::StateExpired:
      at(e.data.at("facility").get<std::string>()).capacity = capacity::Available{};
      return true;
    default:
      return false;
  }
}

nlohmann::json FacilityRegistry::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [code, f] : facilities_) {
    nlohmann::json caps = nlohmann::json::array();
    for (auto c : f.capabilities.items()) caps.push_back(to_string(c));
    out[code] = {{"name", f.name},
                 {"lat", f.point.lat()},
                 {"lon", f.point.lon()},
                 {"contact", f.contact_msisdn},
                 {"capabilities", caps},
                 {"capacity", capacity_to_json(f.capacity)}};
  }
  return out;
}

void FacilityRegistry::load_json(const nlohmann::json& j) {
  facilities_.clear();
  for (const auto& [code, v] : j.items()) {
    Facility f;
    f.code = code;
    f.name = v.at("name").get<std::string>();
    f.point = GeoPoint(v.at("lat").get<double>(), v.at("lon").get<double>());
    f.contact_msisdn = v.at("contact").get<std::string>();
    for (const auto& c : v.at("capabilities"))
      if (auto cap = parse_capability(c.get<std::string>())) f.capabilities.insert(*cap);
    f.capacity = capacity_from_json(v.at("capacity"));
    facilities_.emplace(code, std::move(f));
  }
}

}  // namespace smsroute
