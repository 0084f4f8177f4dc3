#include "smsroute/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace smsroute {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_value(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key, "cannot parse '" + v + "'");
  return out;
}

using Setter = std::function<void(Config&, const std::string& key, const std::string& value)>;

template <typename T, typename Fn>
Setter set_num(Fn field, std::function<bool(T)> ok = nullptr, const char* rule = "out of range") {
  return [field, ok, rule](Config& c, const std::string& key, const std::string& value) {
    const T v = parse_value<T>(key, value);
    if (ok && !ok(v)) throw ConfigError(key, rule);
    field(c) = v;
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto non_neg_int = [](int v) { return v >= 0; };
    auto pos_int = [](int v) { return v > 0; };
    auto pos_real = [](double v) { return v > 0.0; };
    auto non_neg_real = [](double v) { return v >= 0.0; };

    t["gateway.listen"] = [](Config& c, const std::string&, const std::string& v) { c.gateway.listen = v; };

    t["triage.fever_pts"] = set_num<int>([](Config& c) -> int& { return c.triage.weights.fever_pts; }, non_neg_int);
    t["triage.common_symptom_pts"] = set_num<int>([](Config& c) -> int& { return c.triage.weights.common_symptom_pts; }, non_neg_int);
    t["triage.hemorrhage_pts"] = set_num<int>([](Config& c) -> int& { return c.triage.weights.hemorrhage_pts; }, non_neg_int);
    t["triage.epi_pts"] = set_num<int>([](Config& c) -> int& { return c.triage.weights.epi_pts; }, non_neg_int);
    t["triage.spatial_prior_pts"] = set_num<int>([](Config& c) -> int& { return c.triage.weights.spatial_prior_pts; }, non_neg_int);
    t["triage.likely_threshold"] = set_num<int>([](Config& c) -> int& { return c.triage.weights.likely_threshold; }, non_neg_int);
    t["triage.possible_threshold"] = set_num<int>([](Config& c) -> int& { return c.triage.weights.possible_threshold; }, non_neg_int);
    t["triage.prior_radius_km"] = set_num<double>([](Config& c) -> double& { return c.triage.prior.radius_km; }, non_neg_real);
    t["triage.prior_min_cases"] = set_num<int>([](Config& c) -> int& { return c.triage.prior.min_cases; }, pos_int);
    t["triage.incubation_days"] = set_num<int>([](Config& c) -> int& { return c.triage.prior.incubation_days; }, pos_int);
    t["triage.tune_step"] = set_num<int>([](Config& c) -> int& { return c.triage.tune_step; }, non_neg_int);

    t["registry.ttl_hours"] = set_num<int>([](Config& c) -> int& { return c.registry.ttl_hours; }, pos_int);
    t["registry.feedback_chain_max"] = set_num<int>([](Config& c) -> int& { return c.registry.feedback_chain_max; }, non_neg_int);

    t["geo.tower_radius_km"] = set_num<double>([](Config& c) -> double& { return c.geo.tower_km; },
                                               [](double v) { return v >= 0.0 && v <= 50.0; }, "must be in [0, 50]");
    t["geo.place_radius_km"] = set_num<double>([](Config& c) -> double& { return c.geo.place_km; },
                                               [](double v) { return v >= 0.0 && v <= 50.0; }, "must be in [0, 50]");

    t["risk.sigma_km"] = set_num<double>([](Config& c) -> double& { return c.risk.sigma_km; }, pos_real);
    t["risk.tau_days"] = set_num<double>([](Config& c) -> double& { return c.risk.tau_days; }, pos_real);
    t["risk.cell_deg"] = set_num<double>([](Config& c) -> double& { return c.risk.grid.cell_deg; }, pos_real);
    t["risk.n_rows"] = set_num<int>([](Config& c) -> int& { return c.risk.grid.n_rows; }, pos_int);
    t["risk.n_cols"] = set_num<int>([](Config& c) -> int& { return c.risk.grid.n_cols; }, pos_int);
    t["risk.origin_lat"] = [](Config& c, const std::string& key, const std::string& v) {
      const double lat = parse_value<double>(key, v);
      if (!GeoPoint::valid(lat, c.risk.grid.origin.lon())) throw ConfigError(key, "latitude out of range");
      c.risk.grid.origin = GeoPoint(lat, c.risk.grid.origin.lon());
    };
    t["risk.origin_lon"] = [](Config& c, const std::string& key, const std::string& v) {
      const double lon = parse_value<double>(key, v);
      if (!GeoPoint::valid(c.risk.grid.origin.lat(), lon)) throw ConfigError(key, "longitude out of range");
      c.risk.grid.origin = GeoPoint(c.risk.grid.origin.lat(), lon);
    };
    t["risk.default_speed_kmpd"] = set_num<double>([](Config& c) -> double& { return c.risk.default_speed_kmpd; }, non_neg_real);
    t["risk.hash_salt"] = [](Config& c, const std::string&, const std::string& v) { c.risk.hash_salt = v; };
    t["risk.orbit_size"] = set_num<int>([](Config& c) -> int& { return c.risk.orbit_size; }, pos_int);

    t["recommender.code_seed"] = set_num<std::uint64_t>([](Config& c) -> std::uint64_t& { return c.code_seed; });

    t["data.lexicon"] = [](Config& c, const std::string&, const std::string& v) { c.data.lexicon = v; };
    t["data.towers"] = [](Config& c, const std::string&, const std::string& v) { c.data.towers = v; };
    t["data.gazetteer"] = [](Config& c, const std::string&, const std::string& v) { c.data.gazetteer = v; };
    t["data.facilities"] = [](Config& c, const std::string&, const std::string& v) { c.data.facilities = v; };
    return t;
  }();
  return table;
}

}  // namespace

RiskParams Config::risk_params() const {
  RiskParams p;
  p.sigma_km = risk.sigma_km;
  p.tau_days = risk.tau_days;
  p.incubation_days = triage.prior.incubation_days;
  p.default_speed_kmpd = risk.default_speed_kmpd;
  p.orbit_size = static_cast<std::size_t>(risk.orbit_size);
  return p;
}

nlohmann::json Config::to_json() const {
  const auto& w = triage.weights;
  return {{"triage",
           {{"fever_pts", w.fever_pts},
            {"common_symptom_pts", w.common_symptom_pts},
            {"hemorrhage_pts", w.hemorrhage_pts},
            {"epi_pts", w.epi_pts},
            {"spatial_prior_pts", w.spatial_prior_pts},
            {"likely_threshold", w.likely_threshold},
            {"possible_threshold", w.possible_threshold},
            {"prior_radius_km", triage.prior.radius_km},
            {"prior_min_cases", triage.prior.min_cases},
            {"incubation_days", triage.prior.incubation_days},
            {"tune_step", triage.tune_step}}},
          {"registry", {{"ttl_hours", registry.ttl_hours}, {"feedback_chain_max", registry.feedback_chain_max}}},
          {"geo", {{"tower_radius_km", geo.tower_km}, {"place_radius_km", geo.place_km}}},
          {"risk",
           {{"sigma_km", risk.sigma_km},
            {"tau_days", risk.tau_days},
            {"cell_deg", risk.grid.cell_deg},
            {"origin_lat", risk.grid.origin.lat()},
            {"origin_lon", risk.grid.origin.lon()},
            {"n_rows", risk.grid.n_rows},
            {"n_cols", risk.grid.n_cols},
            {"default_speed_kmpd", risk.default_speed_kmpd},
            {"orbit_size", risk.orbit_size}}},
          {"recommender", {{"code_seed", code_seed}}}};
}

Config parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  Config c;
  std::istringstream in{std::string(text)};
  std::string raw, section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no), "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    it->second(c, key, value);
  }
  if (!c.triage.weights.valid())
    throw ConfigError("triage.possible_threshold", "must not exceed triage.likely_threshold");
  for (auto* p : {&c.data.lexicon, &c.data.towers, &c.data.gazetteer, &c.data.facilities})
    if (!p->empty() && p->is_relative() && !base_dir.empty()) *p = base_dir / *p;
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "config file not found");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace smsroute
