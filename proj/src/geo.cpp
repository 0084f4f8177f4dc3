#include "smsroute/geo.hpp"
#include "smsroute/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "smsroute/lexicon.hpp"
#include "smsroute/parser.hpp"
#include "smsroute/wire.hpp"

namespace smsroute {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

std::string place_key(std::string_view name) {
  std::string key;
  for (const auto& t : normalize(name)) key += t;
  return key;
}

// Calls row_fn(fields, line_no) for each data row; handles comments and a header.
template <typename RowFn>
void read_csv(const std::filesystem::path& path, std::size_t lat_field, RowFn row_fn) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_csv(line);
    if (line_no == 1 && fields.size() > lat_field && !parse_double(fields[lat_field])) continue;
    row_fn(fields, line_no);
  }
}

}  // namespace

std::string_view to_string(LocationSource s) {
  switch (s) {
    case LocationSource::Tower: return "TOWER";
    case LocationSource::Postcode: return "POSTCODE";
    case LocationSource::Village: return "VILLAGE";
    case LocationSource::None: break;
  }
  return "NONE";
}

std::optional<LocationSource> parse_location_source(std::string_view s) {
  for (auto src : {LocationSource::None, LocationSource::Tower, LocationSource::Postcode,
                   LocationSource::Village}) {
    if (to_string(src) == s) return src;
  }
  return std::nullopt;
}

std::optional<CellIndex> cell_of(const GeoPoint& p, const GridSpec& grid) {
  const double r = std::floor((p.lat() - grid.origin.lat()) / grid.cell_deg);
  const double c = std::floor((p.lon() - grid.origin.lon()) / grid.cell_deg);
  if (r < 0 || c < 0 || r >= grid.n_rows || c >= grid.n_cols) return std::nullopt;
  return CellIndex{static_cast<int>(r), static_cast<int>(c)};
}

TowerTable load_towers(const std::filesystem::path& path, LoadStats* stats) {
  TowerTable table;
  LoadStats local;
  read_csv(path, 1, [&](const std::vector<std::string>& f, std::size_t line_no) {
    std::optional<double> lat, lon;
    if (f.size() == 3 && !f[0].empty()) {
      lat = parse_double(f[1]);
      lon = parse_double(f[2]);
    }
    if (!lat || !lon || !GeoPoint::valid(*lat, *lon)) {
      ++local.malformed;
      std::clog << path.string() << ":" << line_no << ": malformed tower row skipped\n";
      return;
    }
    if (table.count(f[0])) {
      ++local.duplicates;
      std::clog << path.string() << ":" << line_no << ": duplicate tower " << f[0] << ", last wins\n";
    }
    table.insert_or_assign(f[0], GeoPoint(*lat, *lon));
    ++local.rows;
  });
  if (stats) *stats = local;
  return table;
}

Gazetteer load_gazetteer(const std::filesystem::path& path, LoadStats* stats) {
  Gazetteer g;
  LoadStats local;
  read_csv(path, 2, [&](const std::vector<std::string>& f, std::size_t line_no) {
    std::optional<double> lat, lon;
    const bool kind_ok = f.size() == 4 && (f[1] == "postcode" || f[1] == "village");
    if (kind_ok) {
      lat = parse_double(f[2]);
      lon = parse_double(f[3]);
    }
    const std::string key = f.empty() ? std::string{} : place_key(f[0]);
    if (!kind_ok || key.empty() || !lat || !lon || !GeoPoint::valid(*lat, *lon)) {
      ++local.malformed;
      std::clog << path.string() << ":" << line_no << ": malformed gazetteer row skipped\n";
      return;
    }
    auto& table = f[1] == "postcode" ? g.postcodes : g.villages;
    if (table.count(key)) {
      ++local.duplicates;
      std::clog << path.string() << ":" << line_no << ": duplicate place " << f[0] << ", last wins\n";
    }
    table.insert_or_assign(key, GeoPoint(*lat, *lon));
    ++local.rows;
  });
  if (stats) *stats = local;
  return g;
}

std::optional<GeoPoint> match_village(const Gazetteer& gazetteer, std::string_view name) {
  if (const auto it = gazetteer.villages.find(std::string(name)); it != gazetteer.villages.end())
    return it->second;
  const std::size_t tol = edit_tolerance(name.size());
  if (tol == 0) return std::nullopt;
  std::size_t best = tol + 1;
  std::optional<GeoPoint> found;
  bool ambiguous = false;
  for (const auto& [key, point] : gazetteer.villages) {
    const auto d = levenshtein_within(name, key, std::min(best, tol));
    if (!d) continue;
    if (*d < best) {
      best = *d;
      found = point;
      ambiguous = false;
    } else if (*d == best && !(found == point)) {
      ambiguous = true;
    }
  }
  if (ambiguous) return std::nullopt;
  return found;
}

LocationEstimate resolve_location(const InboundFrame& frame, const SymptomReport& report,
                                  const TowerTable& towers, const Gazetteer& gazetteer,
                                  const LocationRadii& radii) {
  if (frame.tower_id) {
    if (const auto it = towers.find(*frame.tower_id); it != towers.end())
      return {it->second, radii.tower_km, LocationSource::Tower};
  }
  for (const auto& token : report.unmatched_tokens) {
    if (const auto it = gazetteer.postcodes.find(token); it != gazetteer.postcodes.end())
      return {it->second, radii.place_km, LocationSource::Postcode};
  }
  // Start at the hint, then the remaining place-like tokens; an adjacent pair
  // is tried before its first word to cover names such as "port loko".
  const auto& un = report.unmatched_tokens;
  std::size_t first = 0;
  if (report.location_hint) {
    const auto it = std::find(un.begin(), un.end(), *report.location_hint);
    if (it != un.end()) first = static_cast<std::size_t>(it - un.begin());
  }
  std::vector<std::string> candidates;
  auto add_at = [&](std::size_t i) {
    if (!is_alpha_token(un[i])) return;
    if (i + 1 < un.size() && is_alpha_token(un[i + 1])) candidates.push_back(un[i] + un[i + 1]);
    if (un[i].size() >= 4) candidates.push_back(un[i]);
  };
  for (std::size_t i = first; i < un.size(); ++i) add_at(i);
  for (std::size_t i = 0; i < first; ++i) add_at(i);
  for (const auto& name : candidates) {
    if (auto p = match_village(gazetteer, name)) return {*p, radii.place_km, LocationSource::Village};
  }
  return {};
}

}  // namespace smsroute
