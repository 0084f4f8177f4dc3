#include "smsroute/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace smsroute {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

template <typename T>
std::optional<T> parse_num(std::string_view s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_marker(const LexiconHit& h, Marker m) {
  const auto* mk = std::get_if<Marker>(&h.target);
  return mk && *mk == m;
}

bool is_clinical(const LexiconHit& h) {
  return std::holds_alternative<Symptom>(h.target) || std::holds_alternative<EpiFlag>(h.target);
}

// Integer bed count attached to a BEDS phrase: right after it, or right before it.
std::optional<long> beds_count(std::span<const std::string> tokens, const std::vector<LexiconHit>& hits) {
  for (const auto& h : hits) {
    if (!is_marker(h, Marker::Beds)) continue;
    const std::size_t after = h.start + h.length;
    if (after < tokens.size() && is_integer_token(tokens[after])) return parse_num<long>(tokens[after]);
    if (h.start > 0 && is_integer_token(tokens[h.start - 1])) return parse_num<long>(tokens[h.start - 1]);
  }
  return std::nullopt;
}

std::optional<std::size_t> find_keyword(std::span<const std::string> tokens, std::string_view kw) {
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i] == kw) return i;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Intent i) {
  switch (i) {
    case Intent::SymptomReport: return "SYMPTOM_REPORT";
    case Intent::Feedback: return "FEEDBACK";
    case Intent::FacilityUpdate: return "FACILITY_UPDATE";
    case Intent::Unknown: break;
  }
  return "UNKNOWN";
}

bool is_feedback_code(std::string_view token) {
  if (token.size() != 6) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return (u >= 'A' && u <= 'Z') || (u >= '2' && u <= '7');
  });
}

Intent classify_intent(std::span<const std::string> tokens, const Lexicon& lexicon) {
  if (tokens.size() >= 2 && (tokens[0] == "yes" || tokens[0] == "no") && is_feedback_code(tokens[1]))
    return Intent::Feedback;
  if (const auto fac = find_keyword(tokens, "fac"); fac && *fac + 1 < tokens.size())
    return Intent::FacilityUpdate;
  const auto hits = scan(tokens, lexicon);
  if (beds_count(tokens, hits)) return Intent::FacilityUpdate;
  if (std::any_of(hits.begin(), hits.end(), is_clinical)) return Intent::SymptomReport;
  return Intent::Unknown;
}

SymptomReport parse_symptom_report(std::span<const std::string> tokens, const Lexicon& lexicon) {
  SymptomReport report;
  const auto hits = scan(tokens, lexicon);
  std::vector<bool> consumed(tokens.size(), false);
  std::optional<std::size_t> after_location_marker;

  for (const auto& h : hits) {
    for (std::size_t k = h.start; k < h.start + h.length; ++k) consumed[k] = true;
    if (const auto* s = std::get_if<Symptom>(&h.target)) {
      report.symptoms.insert(*s);
    } else if (const auto* f = std::get_if<EpiFlag>(&h.target)) {
      report.epi_flags.insert(*f);
    } else if (is_marker(h, Marker::Location)) {
      if (!after_location_marker) after_location_marker = h.start + h.length;
    } else if (is_marker(h, Marker::Days)) {
      // `<n> days` or `days <n>`
      std::optional<std::size_t> num_at;
      if (h.start > 0 && is_integer_token(tokens[h.start - 1]) && !consumed[h.start - 1])
        num_at = h.start - 1;
      else if (h.start + h.length < tokens.size() && is_integer_token(tokens[h.start + h.length]))
        num_at = h.start + h.length;
      if (num_at) {
        const auto n = parse_num<int>(tokens[*num_at]);
        if (n && *n >= 1 && *n <= 60 && !report.duration_days) {
          report.duration_days = *n;
          consumed[*num_at] = true;
        }
      }
    }
  }
  if (report.symptoms.empty() && report.epi_flags.empty()) throw NoSymptoms();

  auto place_like = [&](std::size_t i) {
    return !consumed[i] && is_alpha_token(tokens[i]) && tokens[i].size() >= 4;
  };
  if (after_location_marker && *after_location_marker < tokens.size() && place_like(*after_location_marker))
    report.location_hint = tokens[*after_location_marker];
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (consumed[i]) continue;
    report.unmatched_tokens.push_back(tokens[i]);
    if (!report.location_hint && place_like(i)) report.location_hint = tokens[i];
  }
  return report;
}

Feedback parse_feedback(std::span<const std::string> tokens) {
  if (tokens.size() < 2 || (tokens[0] != "yes" && tokens[0] != "no"))
    throw BadCode("feedback must start with YES or NO");
  if (!is_feedback_code(tokens[1])) throw BadCode("feedback code must be 6 characters A-Z or 2-7");
  return Feedback{upper(tokens[1]), tokens[0] == "yes" ? Polarity::Positive : Polarity::Negative};
}

FacilityUpdate parse_facility_update(std::span<const std::string> tokens, const Lexicon& lexicon) {
  FacilityUpdate u;
  if (const auto fac = find_keyword(tokens, "fac"); fac && *fac + 1 < tokens.size())
    u.facility_code = upper(tokens[*fac + 1]);
  const auto hits = scan(tokens, lexicon);
  if (auto beds = beds_count(tokens, hits); beds && *beds >= 0) u.beds_available = beds;
  if (const auto loc = find_keyword(tokens, "loc"); loc && *loc + 2 < tokens.size()) {
    const auto lat = parse_num<double>(tokens[*loc + 1]);
    const auto lon = parse_num<double>(tokens[*loc + 2]);
    if (lat && lon) u.new_location = GeoPoint::try_make(*lat, *lon);
  }
  if (!u.beds_available && !u.new_location)
    throw BadUpdate("expected BEDS <n> or LOC <lat> <lon>");
  return u;
}

ParseOutcome parse_message(std::string_view body, const Lexicon& lexicon) {
  ParseOutcome out;
  out.tokens = normalize(body);
  const Intent intent = classify_intent(out.tokens, lexicon);
  try {
    switch (intent) {
      case Intent::SymptomReport:
        out.message.payload = parse_symptom_report(out.tokens, lexicon);
        break;
      case Intent::Feedback:
        out.message.payload = parse_feedback(out.tokens);
        break;
      case Intent::FacilityUpdate:
        out.message.payload = parse_facility_update(out.tokens, lexicon);
        break;
      case Intent::Unknown:
        return out;
    }
    out.message.intent = intent;
  } catch (const std::exception& e) {
    out.rejected_intent = intent;
    out.error = e.what();
    out.message = ParsedMessage{};
  }
  return out;
}

}  // namespace smsroute
