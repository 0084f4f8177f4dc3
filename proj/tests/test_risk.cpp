#include <algorithm>
#include <random>

#include "doctest.h"
#include "smsroute/oracles.hpp"
#include "smsroute/risk.hpp"
#include "support.hpp"

using namespace smsroute;

namespace {
const Timestamp t0 = testing::at("2014-10-20T00:00:00Z");
const GridSpec spec{GeoPoint(7.0, -12.0), 0.1, 20, 25};

CaseRecord record(GeoPoint p, double weight, Timestamp at, std::string key = "k") {
  return CaseRecord{std::move(key), p, weight, at};
}

std::vector<CaseRecord> random_records(std::uint32_t seed, int n) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> lat(6.8, 9.2), lon(-12.2, -9.3), w(0.0, 1.0), age(-2.0, 50.0);
  std::vector<CaseRecord> out;
  for (int i = 0; i < n; ++i)
    out.push_back(record(GeoPoint(lat(rng), lon(rng)), w(rng),
                         t0 - std::chrono::seconds(static_cast<long>(age(rng) * 86400)), "s" + std::to_string(i % 7)));
  return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a(i) - b(i)) / std::max(std::abs(b(i)), std::numeric_limits<double>::min()));
  return worst;
}

MovementOrbit walker(const std::string& key, double km_per_day, int days) {
  MovementOrbit o(key, 10);
  const double deg_per_km = 180.0 / (std::numbers::pi * kEarthRadiusKm);
  for (int d = 0; d <= days; ++d) o.add(GeoPoint(8.0 + d * km_per_day * deg_per_km, -11.0), t0 - std::chrono::days(days - d));
  return o;
}
}  // namespace

TEST_CASE("empty input gives a zero grid") {
  const auto g = build_grid<double>({}, spec, t0);
  CHECK(g.values.rows() == spec.n_rows);
  CHECK(g.values.cols() == spec.n_cols);
  CHECK(max_abs(g.values) == 0.0);
}

TEST_CASE("fresh unit record at a cell centre scores 1 there") {
  const std::vector<CaseRecord> rs{record(spec.cell_center(4, 6), 1.0, t0)};
  const auto g = build_grid<double>(rs, spec, t0);
  CHECK(g.values(4, 6) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::Index r, c;
  g.values.maxCoeff(&r, &c);
  CHECK(r == 4);
  CHECK(c == 6);
}

TEST_CASE("grid matches the brute-force oracle") {
  const auto rs = random_records(7, 50);
  RiskParams p;
  const auto g = build_grid<double>(rs, spec, t0, p);
  const auto ref = oracle::grid(rs, spec, to_epoch(t0), p);
  CHECK(rel_err(g.values, ref) <= 1e-9);

  p.sigma_km = 3.0;
  p.tau_days = 2.0;
  CHECK(rel_err(build_grid<double>(rs, spec, t0, p).values, oracle::grid(rs, spec, to_epoch(t0), p)) <= 1e-9);
}

TEST_CASE("grid ignores future, stale and zero-weight records") {
  const GeoPoint p = spec.cell_center(10, 10);
  const std::vector<CaseRecord> rs{record(p, 1.0, t0 + std::chrono::hours(1)),
                                   record(p, 1.0, t0 - std::chrono::days(43)), record(p, 0.0, t0)};
  CHECK(max_abs(build_grid<double>(rs, spec, t0).values) == 0.0);

  const std::vector<CaseRecord> edge{record(p, 1.0, t0 - std::chrono::days(42))};
  CHECK(build_grid<double>(edge, spec, t0).values(10, 10) == doctest::Approx(std::exp(-6.0)));
}

TEST_CASE("grid is linear in weights and decays with age") {
  const GeoPoint p = spec.cell_center(8, 8);
  const auto one = build_grid<double>(std::vector{record(p, 0.4, t0)}, spec, t0).values;
  const auto two = build_grid<double>(std::vector{record(p, 0.4, t0), record(p, 0.4, t0)}, spec, t0).values;
  CHECK(rel_err(two, 2.0 * one) <= 1e-12);
  const auto old = build_grid<double>(std::vector{record(p, 0.4, t0 - std::chrono::days(7))}, spec, t0).values;
  CHECK(old(8, 8) == doctest::Approx(one(8, 8) * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("grid is independent of record order") {
  auto rs = random_records(11, 30);
  const auto a = build_grid<double>(rs, spec, t0).values;
  std::reverse(rs.begin(), rs.end());
  CHECK(rel_err(build_grid<double>(rs, spec, t0).values, a) <= 1e-12);
}

TEST_CASE("float grid agrees with double") {
  const auto rs = random_records(5, 20);
  const auto d = build_grid<double>(rs, spec, t0).values;
  const Eigen::MatrixXd f = build_grid<float>(rs, spec, t0).values.cast<double>();
  CHECK((d - f).cwiseAbs().maxCoeff() <= 1e-4 * std::max(1.0, max_abs(d)));
}

TEST_CASE("gaussian taps") {
  CHECK(gaussian_taps(0.0).size() == 1);
  const auto taps = gaussian_taps(1.0);
  CHECK(taps.size() == 7);
  CHECK(taps.sum() == doctest::Approx(1.0));
  CHECK(taps(0) == doctest::Approx(taps(6)));
  CHECK(gaussian_taps(2.0).size() == 13);
}

TEST_CASE("forecast") {
  const auto rs = random_records(3, 40);
  const auto g = build_grid<double>(rs, spec, t0);

  SUBCASE("zero horizon is the identity") {
    const auto f = forecast<double>(g, {}, 0.0);
    CHECK(f.values == g.values);
  }
  SUBCASE("negative horizon is rejected") {
    CHECK_THROWS_AS(forecast<double>(g, {}, -1.0), NegativeHorizon);
  }
  SUBCASE("separable blur equals direct convolution") {
    RiskParams p;
    p.default_speed_kmpd = 5.0;
    const auto f = forecast<double>(g, {}, 3.0, p);
    const double km_per_cell = kEarthRadiusKm * std::numbers::pi / 180.0 * spec.cell_deg;
    CHECK(rel_err(f.values, oracle::convolve(g.values, 15.0 / km_per_cell)) <= 1e-9);
    CHECK(f.horizon_days == 3.0);
  }
  SUBCASE("point mass spreads into the kernel") {
    BasicRiskGrid<double> point{spec, Eigen::MatrixXd::Zero(spec.n_rows, spec.n_cols), t0, 0.0};
    point.values(10, 12) = 1.0;
    const auto f = forecast<double>(point, {}, 4.0);
    CHECK(rel_err(f.values, oracle::convolve(point.values, 20.0 / (kEarthRadiusKm * std::numbers::pi / 1800.0))) <=
          1e-9);
    CHECK(f.values.sum() == doctest::Approx(1.0));  // kernel fits inside the grid
    CHECK(f.values(10, 12) < 1.0);
  }
  SUBCASE("forecast is linear") {
    const auto h = build_grid<double>(random_records(4, 10), spec, t0);
    BasicRiskGrid<double> sum = g;
    sum.values = g.values + 2.0 * h.values;
    const Eigen::MatrixXd lhs = forecast<double>(sum, {}, 2.0).values;
    const Eigen::MatrixXd rhs = forecast<double>(g, {}, 2.0).values + 2.0 * forecast<double>(h, {}, 2.0).values;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, max_abs(rhs)));
  }
}

TEST_CASE("orbit speed") {
  MovementOrbit still("a", 10);
  still.add(GeoPoint(8.0, -11.0), t0);
  CHECK(still.radius_km() == 0.0);
  CHECK(median_orbit_speed(std::vector{still}, t0, 21, 5.0) == 5.0);

  const auto w = walker("w", 2.0, 4);  // 8 km over 4 days: radius 4 km
  CHECK(w.timespan_days() == doctest::Approx(4.0));
  CHECK(w.radius_km() == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(median_orbit_speed(std::vector{w}, t0, 21, 5.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(median_orbit_speed(std::vector{w}, t0 + std::chrono::days(30), 21, 5.0) == 5.0);

  const std::vector orbits{walker("a", 2.0, 4), walker("b", 4.0, 4), walker("c", 8.0, 4)};
  CHECK(median_orbit_speed(orbits, t0, 21, 5.0) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("orbit keeps the last K fixes and its centroid ignores order") {
  MovementOrbit o("k", 10);
  for (int i = 0; i < 12; ++i) o.add(GeoPoint(8.0 + 0.01 * i, -11.0), t0 + std::chrono::hours(i));
  CHECK(o.locations().size() == 10);
  CHECK(o.locations().front().point.lat() == doctest::Approx(8.02));

  MovementOrbit a("a", 10), b("b", 10);
  const std::vector pts{GeoPoint(8.1, -11.3), GeoPoint(7.9, -10.7), GeoPoint(8.33, -11.01)};
  for (const auto& p : pts) a.add(p, t0);
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) b.add(*it, t0);
  CHECK(a.centroid() == b.centroid());
}

TEST_CASE("engine records only located cases and keeps orbits per sender") {
  RiskEngine eng({}, "salt");
  std::vector<Event> log;
  eng.set_sink([&](const Event& e) { log.push_back(e); });
  CaseAssessment a;
  a.score = 0.5;
  eng.record_case(a, {}, "+231880000001", t0);
  CHECK(eng.records().empty());
  for (int i = 0; i < 12; ++i)
    eng.record_case(a, {GeoPoint(8.0, -11.0 + 0.01 * i), 5.0, LocationSource::Tower}, "+231880000001", t0);
  eng.record_case(a, {GeoPoint(8.5, -11.0), 5.0, LocationSource::Tower}, "+231880000002", t0);
  CHECK(eng.records().size() == 13);
  CHECK(eng.orbits().size() == 2);
  const auto* o = eng.orbit(sender_key("salt", "+231880000001"));
  REQUIRE(o);
  CHECK(o->locations().size() == 10);

  const auto key = sender_key("salt", "+231880000001");
  CHECK(key.size() == 16);
  CHECK(key.find("231880000001") == std::string::npos);
  CHECK(sender_key("other", "+231880000001") != key);

  RiskEngine folded({}, "salt");
  for (const auto& e : log) CHECK(folded.apply(e));
  CHECK(folded.to_json() == eng.to_json());
  RiskEngine loaded({}, "salt");
  loaded.load_json(eng.to_json());
  CHECK(loaded.records() == eng.records());
}

TEST_CASE("geojson export") {
  RiskGrid empty{spec, Eigen::MatrixXd::Zero(spec.n_rows, spec.n_cols), t0, 0.0};
  const auto none = nlohmann::json::parse(export_geojson(empty, 0.01));
  CHECK(none["type"] == "FeatureCollection");
  CHECK(none["features"].empty());

  RiskGrid hot = empty;
  hot.values(2, 3) = 0.75;
  hot.values(5, 5) = 0.001;
  const auto doc = nlohmann::json::parse(export_geojson(hot, 0.01));
  REQUIRE(doc["features"].size() == 1);
  const auto& f = doc["features"][0];
  CHECK(f["type"] == "Feature");
  CHECK(f["geometry"]["type"] == "Polygon");
  CHECK(f["properties"]["risk"] == 0.75);
  CHECK(f["properties"]["row"] == 2);
  CHECK(f["properties"]["col"] == 3);
  const auto& ring = f["geometry"]["coordinates"][0];
  REQUIRE(ring.size() == 5);
  CHECK(ring[0] == ring[4]);
  // [lon, lat] order; south-west corner of row 2, col 3.
  CHECK(ring[0][0].get<double>() == doctest::Approx(-11.7));
  CHECK(ring[0][1].get<double>() == doctest::Approx(7.2));
  CHECK(ring[2][0].get<double>() == doctest::Approx(-11.6));
  CHECK(ring[2][1].get<double>() == doctest::Approx(7.3));
  // Counterclockwise: positive shoelace area.
  double area = 0.0;
  for (int i = 0; i < 4; ++i)
    area += ring[i][0].get<double>() * ring[i + 1][1].get<double>() - ring[i + 1][0].get<double>() * ring[i][1].get<double>();
  CHECK(area > 0.0);
}
