#include "smsroute/risk.hpp"

#include <cstdio>

#include <openssl/evp.h>

namespace smsroute {

void MovementOrbit::add(const GeoPoint& p, Timestamp at) {
  fixes_.push_back({p, at});
  while (fixes_.size() > capacity_) fixes_.pop_front();
}

GeoPoint MovementOrbit::centroid() const {
  if (fixes_.empty()) return {};
  std::vector<double> lats, lons;
  for (const auto& f : fixes_) {
    lats.push_back(f.point.lat());
    lons.push_back(f.point.lon());
  }
  // Summing in sorted order makes the mean independent of arrival order.
  std::sort(lats.begin(), lats.end());
  std::sort(lons.begin(), lons.end());
  double lat = 0.0, lon = 0.0;
  for (double v : lats) lat += v;
  for (double v : lons) lon += v;
  const double n = static_cast<double>(fixes_.size());
  return GeoPoint(std::clamp(lat / n, -90.0, 90.0), std::clamp(lon / n, -180.0, std::nextafter(180.0, 0.0)));
}

double MovementOrbit::radius_km() const {
  if (fixes_.size() < 2) return 0.0;
  const GeoPoint c = centroid();
  double r = 0.0;
  for (const auto& f : fixes_) r = std::max(r, haversine_km(c, f.point));
  return r;
}

double MovementOrbit::timespan_days() const {
  if (fixes_.size() < 2) return 0.0;
  Timestamp lo = fixes_.front().at, hi = fixes_.front().at;
  for (const auto& f : fixes_) {
    lo = std::min(lo, f.at);
    hi = std::max(hi, f.at);
  }
  return days_between(lo, hi);
}

double median_orbit_speed(std::span<const MovementOrbit> orbits, Timestamp now, int incubation_days,
                          double fallback) {
  std::vector<double> speeds;
  for (const auto& o : orbits) {
    if (o.locations().size() < 2) continue;
    const double age = days_between(o.locations().back().at, now);
    if (age < 0.0 || age > incubation_days) continue;
    speeds.push_back(o.radius_km() / std::max(1.0, o.timespan_days()));
  }
  if (speeds.empty()) return fallback;
  std::sort(speeds.begin(), speeds.end());
  const std::size_t mid = speeds.size() / 2;
  return speeds.size() % 2 ? speeds[mid] : 0.5 * (speeds[mid - 1] + speeds[mid]);
}

Eigen::VectorXd gaussian_taps(double sigma_cells) {
  if (!(sigma_cells > 0.0)) return Eigen::VectorXd::Ones(1);
  const auto half = static_cast<Eigen::Index>(std::floor(3.0 * sigma_cells + 1e-9));
  const Eigen::ArrayXd offsets = Eigen::ArrayXd::LinSpaced(2 * half + 1, -static_cast<double>(half), static_cast<double>(half));
  Eigen::VectorXd taps = (-(offsets * offsets) / (2.0 * sigma_cells * sigma_cells)).exp().matrix();
  return taps / taps.sum();
}

Eigen::MatrixXd blur_operator(Eigen::Index n, const Eigen::VectorXd& taps) {
  const Eigen::Index half = taps.size() / 2;
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = -half; k <= half; ++k)
      if (i + k >= 0 && i + k < n) op(i, i + k) = taps(k + half);
  return op;
}

std::string export_geojson(const RiskGrid& grid, double threshold) {
  auto round_to = [](double v, double scale) { return std::round(v * scale) / scale; };
  nlohmann::json features = nlohmann::json::array();
  for (int row = 0; row < grid.spec.n_rows; ++row) {
    for (int col = 0; col < grid.spec.n_cols; ++col) {
      const double v = grid.values(row, col);
      if (!(v >= threshold)) continue;
      const auto [sw, ne] = grid.spec.cell_bounds(row, col);
      const double w = round_to(sw.lon(), 1e9), s = round_to(sw.lat(), 1e9);
      const double e = round_to(ne.lon(), 1e9), n = round_to(ne.lat(), 1e9);
      // Exterior ring counterclockwise, closed.
      nlohmann::json ring = nlohmann::json::array({{w, s}, {e, s}, {e, n}, {w, n}, {w, s}});
      features.push_back({{"type", "Feature"},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}}},
                          {"properties", {{"risk", round_to(v, 1e6)}, {"row", row}, {"col", col}}}});
    }
  }
  nlohmann::json doc{{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump();
}

std::string sender_key(const std::string& salt, const std::string& msisdn) {
  const std::string input = salt + ":" + msisdn;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(input.data(), input.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < 8 && i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

void RiskEngine::record_case(const CaseAssessment& a, const LocationEstimate& loc, const std::string& msisdn,
                             Timestamp now) {
  if (!loc.point) return;
  Event e;
  e.kind = EventKind::CaseRecord;
  e.at = now;
  e.data = {{"sender", sender_key(salt_, msisdn)},
            {"lat", loc.point->lat()},
            {"lon", loc.point->lon()},
            {"weight", a.score}};
  apply(e);
  if (sink_) sink_(e);
}

std::vector<MovementOrbit> RiskEngine::orbits() const {
  std::vector<MovementOrbit> out;
  out.reserve(orbits_.size());
  for (const auto& [key, o] : orbits_) out.push_back(o);
  return out;
}

const MovementOrbit* RiskEngine::orbit(const std::string& key) const {
  const auto it = orbits_.find(key);
  return it == orbits_.end() ? nullptr : &it->second;
}

RiskGrid RiskEngine::forecast_grid(const GridSpec& spec, Timestamp now, double horizon_days) const {
  const auto all = orbits();
  return forecast<double>(grid(spec, now), all, horizon_days, params_);
}

bool RiskEngine::apply(const Event& e) {
  if (e.kind != EventKind::CaseRecord) return false;
  CaseRecord r{e.data.at("sender").get<std::string>(),
               GeoPoint(e.data.at("lat").get<double>(), e.data.at("lon").get<double>()),
               e.data.at("weight").get<double>(), e.at};
  auto [it, fresh] = orbits_.try_emplace(r.sender_key, r.sender_key, params_.orbit_size);
  it->second.add(r.point, r.at);
  records_.push_back(std::move(r));
  return true;
}

nlohmann::json RiskEngine::to_json() const {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : records_)
    records.push_back({{"sender", r.sender_key}, {"lat", r.point.lat()}, {"lon", r.point.lon()},
                       {"weight", r.weight}, {"at", to_epoch(r.at)}});
  nlohmann::json orbits = nlohmann::json::object();
  for (const auto& [key, o] : orbits_) {
    nlohmann::json fixes = nlohmann::json::array();
    for (const auto& f : o.locations()) fixes.push_back({f.point.lat(), f.point.lon(), to_epoch(f.at)});
    orbits[key] = fixes;
  }
  return {{"records", records}, {"orbits", orbits}};
}

void RiskEngine::load_json(const nlohmann::json& j) {
  records_.clear();
  orbits_.clear();
  for (const auto& r : j.at("records"))
    records_.push_back({r.at("sender").get<std::string>(), GeoPoint(r.at("lat").get<double>(), r.at("lon").get<double>()),
                        r.at("weight").get<double>(), from_epoch(r.at("at").get<std::int64_t>())});
  for (const auto& [key, fixes] : j.at("orbits").items()) {
    MovementOrbit o(key, params_.orbit_size);
    for (const auto& f : fixes) o.add(GeoPoint(f.at(0).get<double>(), f.at(1).get<double>()), from_epoch(f.at(2).get<std::int64_t>()));
    orbits_.emplace(key, std::move(o));
  }
}

}  // namespace smsroute
