#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "smsroute/errors.hpp"
#include "smsroute/geo.hpp"
#include "smsroute/lexicon.hpp"
#include "smsroute/parser.hpp"
#include "smsroute/wire.hpp"
#include "support.hpp"

using namespace smsroute;

namespace {
// Spherical law of cosines; adequate away from tiny separations.
double cosine_law_km(double lat1, double lon1, double lat2, double lon2) {
  const double r = std::numbers::pi / 180.0;
  const double c = std::sin(lat1 * r) * std::sin(lat2 * r) + std::cos(lat1 * r) * std::cos(lat2 * r) * std::cos((lon2 - lon1) * r);
  return 6371.0088 * std::acos(std::clamp(c, -1.0, 1.0));
}

SymptomReport report_of(const std::string& body) {
  return parse_symptom_report(normalize(body), Lexicon::builtin());
}

InboundFrame frame_with(std::optional<std::string> tower) {
  return {"+22462000001", std::move(tower), testing::at("2014-10-20T08:15:00Z"), "x", 1};
}
}  // namespace

TEST_CASE("haversine reference values") {
  CHECK(haversine_km(GeoPoint(9.5, -13.7), GeoPoint(9.5, -13.7)) == 0.0);
  CHECK(haversine_km(GeoPoint(0, 0), GeoPoint(0, 1)) == doctest::Approx(6371.0088 * std::numbers::pi / 180.0).epsilon(1e-12));
  CHECK(haversine_km(GeoPoint(0, 0), GeoPoint(0, 1)) == doctest::Approx(111.195).epsilon(1e-5));
  CHECK(haversine_km(GeoPoint(0, 0), GeoPoint(0, -180)) == doctest::Approx(std::numbers::pi * 6371.0088).epsilon(1e-12));
  CHECK(haversine_km(GeoPoint(90, 0), GeoPoint(-90, 0)) == doctest::Approx(std::numbers::pi * 6371.0088).epsilon(1e-12));
}

TEST_CASE("haversine matches the law of cosines, is symmetric and non-negative") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 179.999);
  for (int i = 0; i < 5000; ++i) {
    const GeoPoint a(lat(gen), lon(gen)), b(lat(gen), lon(gen));
    const double d = haversine_km(a, b);
    CHECK(d >= 0.0);
    CHECK(d == doctest::Approx(haversine_km(b, a)).epsilon(1e-12));
    if (d > 1.0) CHECK(d == doctest::Approx(cosine_law_km(a.lat(), a.lon(), b.lat(), b.lon())).epsilon(1e-9));
  }
}

TEST_CASE("haversine vectorizes over Eigen arrays") {
  Eigen::ArrayXd lats(3), lons(3);
  lats << 0.0, 8.5, -30.0;
  lons << 1.0, -10.0, 150.0;
  const Eigen::ArrayXd d = haversine_km(0.0, 0.0, lats, lons);
  for (int i = 0; i < 3; ++i) CHECK(d(i) == doctest::Approx(haversine_km(GeoPoint(0, 0), GeoPoint(lats(i), lons(i)))));
}

TEST_CASE("geo point validation") {
  CHECK_THROWS_AS(GeoPoint(95, 0), std::invalid_argument);
  CHECK_THROWS_AS(GeoPoint(0, 180), std::invalid_argument);
  CHECK_FALSE(GeoPoint::try_make(std::nan(""), 0));
  CHECK(GeoPoint::try_make(-90, -180));
}

TEST_CASE("cell_of floor arithmetic") {
  const GridSpec g;
  CHECK(cell_of(g.origin, g) == CellIndex{0, 0});
  CHECK(cell_of(GeoPoint(g.origin.lat() + 0.25, g.origin.lon() + 0.25), g) == CellIndex{2, 2});
  CHECK_FALSE(cell_of(GeoPoint(g.origin.lat() - 0.01, g.origin.lon()), g));
  CHECK_FALSE(cell_of(GeoPoint(g.origin.lat() + g.n_rows * g.cell_deg + 0.01, g.origin.lon()), g));
  const auto c = g.cell_center(3, 4);
  CHECK(cell_of(c, g) == CellIndex{3, 4});
}

TEST_CASE("tower and gazetteer loading") {
  const auto dir = testing::scratch("geo-load");
  LoadStats stats;
  auto towers = load_towers(testing::write_file(dir / "t.csv", "tower_id,lat,lon\nA,1,2\nB,3,4\nC,5,6\n"), &stats);
  CHECK(towers.size() == 3);
  CHECK(stats.malformed == 0);

  towers = load_towers(testing::write_file(dir / "t2.csv", "A,1,2\nB,95,4\nA,7,8\n"), &stats);
  CHECK(towers.size() == 1);
  CHECK(stats.malformed == 1);
  CHECK(stats.duplicates == 1);
  CHECK(towers.at("A") == GeoPoint(7, 8));

  const auto gaz = load_gazetteer(
      testing::write_file(dir / "g.csv", "name,kind,lat,lon\nKindia,village,10.05,-12.86\n1000,postcode,6.3,-10.8\nx,town,1,1\n"),
      &stats);
  CHECK(gaz.villages.size() == 1);
  CHECK(gaz.postcodes.size() == 1);
  CHECK(stats.malformed == 1);
  CHECK_THROWS_AS(load_towers(dir / "missing.csv"), FileNotFound);
}

TEST_CASE("resolve_location priority and fuzzy villages") {
  const TowerTable towers{{"GN-CKY-014", GeoPoint(9.541, -13.677)}};
  Gazetteer gaz;
  gaz.villages["kindia"] = GeoPoint(10.056, -12.865);
  gaz.villages["lofacounty"] = GeoPoint(8.19, -9.72);
  gaz.postcodes["1000"] = GeoPoint(6.31, -10.8);

  auto loc = resolve_location(frame_with("GN-CKY-014"), report_of("fever kindia"), towers, gaz);
  CHECK(loc.source == LocationSource::Tower);
  CHECK(loc.point == towers.at("GN-CKY-014"));
  CHECK(loc.radius_km == 5.0);

  loc = resolve_location(frame_with(std::nullopt), report_of("fever kindia"), towers, gaz);
  CHECK(loc.source == LocationSource::Village);
  CHECK(loc.radius_km == 10.0);

  loc = resolve_location(frame_with(std::nullopt), report_of("fever kindya"), towers, gaz);
  CHECK(loc.source == LocationSource::Village);
  CHECK(loc.point == gaz.villages.at("kindia"));

  loc = resolve_location(frame_with("UNKNOWN-TOWER"), report_of("fever 1000"), towers, gaz);
  CHECK(loc.source == LocationSource::Postcode);

  loc = resolve_location(frame_with(std::nullopt), report_of("fever village lofa county"), towers, gaz);
  CHECK(loc.source == LocationSource::Village);
  CHECK(loc.point == gaz.villages.at("lofacounty"));

  loc = resolve_location(frame_with(std::nullopt), report_of("fever"), towers, gaz);
  CHECK(loc.source == LocationSource::None);
  CHECK_FALSE(loc.point);
}

TEST_CASE("ambiguous village names resolve to nothing") {
  Gazetteer gaz;
  gaz.villages["bandaa"] = GeoPoint(1, 1);
  gaz.villages["bandoo"] = GeoPoint(2, 2);
  CHECK_FALSE(match_village(gaz, "bandao"));
  CHECK(match_village(gaz, "bandaa") == GeoPoint(1, 1));
}
