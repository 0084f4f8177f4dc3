#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace smsroute {

struct InboundFrame;
struct SymptomReport;

inline constexpr double kEarthRadiusKm = 6371.0088;

/// Latitude in [-90, 90], longitude in [-180, 180), degrees.
class GeoPoint {
 public:
  GeoPoint() = default;
  GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
    if (!valid(lat, lon)) throw std::invalid_argument("coordinates out of range");
  }

  static bool valid(double lat, double lon) {
    return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
           lon >= -180.0 && lon < 180.0;
  }
  static std::optional<GeoPoint> try_make(double lat, double lon) {
    if (!valid(lat, lon)) return std::nullopt;
    return GeoPoint(lat, lon);
  }

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  bool operator==(const GeoPoint&) const = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

namespace detail {
inline double clamp_unit(double x) { return x > 1.0 ? 1.0 : x; }
template <typename Derived>
auto clamp_unit(const Eigen::ArrayBase<Derived>& x) {
  return x.min(1.0);
}
}  // namespace detail

/// Great-circle distance in km on a sphere of radius kEarthRadiusKm.
/// Works for plain scalars and for Eigen array expressions (coefficient-wise).
template <typename LatA, typename LonA, typename LatB, typename LonB>
auto haversine_km(const LatA& lat_a, const LonA& lon_a, const LatB& lat_b, const LonB& lon_b) {
  using std::asin;
  using std::cos;
  using std::sin;
  using std::sqrt;
  constexpr double rad = std::numbers::pi / 180.0;
  const auto s_lat = sin((lat_b - lat_a) * (rad / 2.0));
  const auto s_lon = sin((lon_b - lon_a) * (rad / 2.0));
  const auto h = s_lat * s_lat + cos(lat_a * rad) * cos(lat_b * rad) * s_lon * s_lon;
  return (2.0 * kEarthRadiusKm) * asin(sqrt(detail::clamp_unit(h)));
}

inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  return haversine_km(a.lat(), a.lon(), b.lat(), b.lon());
}

enum class LocationSource { None, Tower, Postcode, Village };
std::string_view to_string(LocationSource s);
std::optional<LocationSource> parse_location_source(std::string_view s);

struct LocationEstimate {
  std::optional<GeoPoint> point;
  double radius_km = 0.0;
  LocationSource source = LocationSource::None;

  bool has_point() const { return point.has_value(); }
  bool operator==(const LocationEstimate&) const = default;
};

struct CellIndex {
  int row = 0;
  int col = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Regular lat/lon grid anchored at its south-west corner.
struct GridSpec {
  GeoPoint origin{4.0, -15.5};
  double cell_deg = 0.1;
  int n_rows = 90;
  int n_cols = 85;

  bool operator==(const GridSpec&) const = default;

  GeoPoint cell_center(int row, int col) const {
    return GeoPoint(origin.lat() + (row + 0.5) * cell_deg, origin.lon() + (col + 0.5) * cell_deg);
  }
  /// South-west and north-east corners of a cell.
  std::pair<GeoPoint, GeoPoint> cell_bounds(int row, int col) const {
    return {GeoPoint(origin.lat() + row * cell_deg, origin.lon() + col * cell_deg),
            GeoPoint(origin.lat() + (row + 1) * cell_deg, origin.lon() + (col + 1) * cell_deg)};
  }
};

std::optional<CellIndex> cell_of(const GeoPoint& p, const GridSpec& grid);

struct LoadStats {
  std::size_t rows = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
};

using TowerTable = std::map<std::string, GeoPoint>;

struct Gazetteer {
  /// Keys are normalized names with spaces removed.
  std::map<std::string, GeoPoint> postcodes;
  std::map<std::string, GeoPoint> villages;
};

/// `tower_id,lat,lon`. A non-numeric first row is treated as a header.
TowerTable load_towers(const std::filesystem::path& path, LoadStats* stats = nullptr);
/// `name,kind(postcode|village),lat,lon`.
Gazetteer load_gazetteer(const std::filesystem::path& path, LoadStats* stats = nullptr);

struct LocationRadii {
  double tower_km = 5.0;
  double place_km = 10.0;
};

/// Village lookup with the parser's typo tolerance; ambiguous names give nullopt.
std::optional<GeoPoint> match_village(const Gazetteer& gazetteer, std::string_view name);

/// Tower, then postcode, then village name, then nothing.
LocationEstimate resolve_location(const InboundFrame& frame, const SymptomReport& report,
                                  const TowerTable& towers, const Gazetteer& gazetteer,
                                  const LocationRadii& radii = {});

}  // namespace smsroute
