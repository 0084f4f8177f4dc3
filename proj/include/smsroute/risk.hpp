#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "smsroute/event.hpp"
#include "smsroute/geo.hpp"
#include "smsroute/time.hpp"
#include "smsroute/triage.hpp"

namespace smsroute {

struct CaseRecord {
  std::string sender_key;
  GeoPoint point;
  double weight = 0.0;  // assessment score in [0, 1]
  Timestamp at{};

  bool operator==(const CaseRecord&) const = default;
};

/// The last K geolocated messages of one (hashed) sender.
class MovementOrbit {
 public:
  struct Fix {
    GeoPoint point;
    Timestamp at{};
    bool operator==(const Fix&) const = default;
  };

  MovementOrbit() = default;
  MovementOrbit(std::string sender_key, std::size_t capacity) : key_(std::move(sender_key)), capacity_(capacity) {}

  void add(const GeoPoint& p, Timestamp at);

  const std::string& sender_key() const { return key_; }
  const std::deque<Fix>& locations() const { return fixes_; }
  std::size_t capacity() const { return capacity_; }

  /// Arithmetic mean of latitudes and longitudes; independent of insertion order.
  GeoPoint centroid() const;
  /// Largest distance from the centroid to a retained fix; 0 for one fix.
  double radius_km() const;
  /// Days between the oldest and newest retained fix.
  double timespan_days() const;

  bool operator==(const MovementOrbit&) const = default;

 private:
  std::string key_;
  std::size_t capacity_ = 10;
  std::deque<Fix> fixes_;
};

template <typename Scalar>
struct BasicRiskGrid {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  GridSpec spec;
  Matrix values;  // n_rows x n_cols, row 0 is the southern edge
  Timestamp as_of{};
  double horizon_days = 0.0;
};
using RiskGrid = BasicRiskGrid<double>;

struct RiskParams {
  double sigma_km = 10.0;
  double tau_days = 7.0;
  int incubation_days = 21;
  double default_speed_kmpd = 5.0;
  std::size_t orbit_size = 10;
};

class NegativeHorizon : public std::invalid_argument {
 public:
  NegativeHorizon() : std::invalid_argument("forecast horizon must be non-negative") {}
};

/// Space-time Gaussian kernel surface:
///   value(c) = sum_r w_r * exp(-d(c, r)^2 / (2 sigma^2)) * exp(-age_r / tau)
/// over records aged [0, 2 * incubation] days at `now`.
template <typename Scalar = double>
BasicRiskGrid<Scalar> build_grid(std::span<const CaseRecord> records, const GridSpec& spec, Timestamp now,
                                 const RiskParams& params = {}) {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  BasicRiskGrid<Scalar> grid{spec, BasicRiskGrid<Scalar>::Matrix::Zero(spec.n_rows, spec.n_cols), now, 0.0};

  const double max_age = 2.0 * params.incubation_days;
  std::vector<const CaseRecord*> live;
  for (const auto& r : records) {
    const double age = days_between(r.at, now);
    if (age >= 0.0 && age <= max_age && r.weight != 0.0) live.push_back(&r);
  }
  if (live.empty()) return grid;

  const Eigen::Index n = static_cast<Eigen::Index>(live.size());
  Array lat(n), lon(n), mass(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = *live[static_cast<std::size_t>(i)];
    lat(i) = r.point.lat();
    lon(i) = r.point.lon();
    mass(i) = r.weight * std::exp(-days_between(r.at, now) / params.tau_days);
  }
  const Scalar inv_two_sigma2 = Scalar(1) / (Scalar(2) * params.sigma_km * params.sigma_km);
  for (int row = 0; row < spec.n_rows; ++row) {
    for (int col = 0; col < spec.n_cols; ++col) {
      const GeoPoint c = spec.cell_center(row, col);
      const Array d = haversine_km(Scalar(c.lat()), Scalar(c.lon()), lat, lon);
      grid.values(row, col) = (mass * (-(d * d) * inv_two_sigma2).exp()).sum();
    }
  }
  return grid;
}

/// Median of radius / max(1 day, timespan) over orbits with at least two
/// fixes, the newest within the incubation window of `now`; `fallback` when
/// there are none.
double median_orbit_speed(std::span<const MovementOrbit> orbits, Timestamp now, int incubation_days,
                          double fallback);

/// Normalized 1-D Gaussian weights on offsets -K..K, K = floor(3 sigma).
Eigen::VectorXd gaussian_taps(double sigma_cells);

/// Banded Toeplitz operator that applies `taps` along an axis of length n
/// with zero padding outside.
Eigen::MatrixXd blur_operator(Eigen::Index n, const Eigen::VectorXd& taps);

/// Spreads the grid with a Gaussian of std `speed * horizon` km, expressed
/// in cells along the meridian. Separable: rows then columns.
template <typename Scalar>
BasicRiskGrid<Scalar> blur(const BasicRiskGrid<Scalar>& grid, double sigma_km, double horizon_days) {
  BasicRiskGrid<Scalar> out = grid;
  out.horizon_days = horizon_days;
  const double km_per_cell = kEarthRadiusKm * std::numbers::pi / 180.0 * grid.spec.cell_deg;
  const double sigma_cells = sigma_km / km_per_cell;
  const Eigen::VectorXd taps = gaussian_taps(sigma_cells);
  if (taps.size() <= 1) return out;
  using Matrix = typename BasicRiskGrid<Scalar>::Matrix;
  const Matrix rows = blur_operator(grid.values.rows(), taps).template cast<Scalar>();
  const Matrix cols = blur_operator(grid.values.cols(), taps).template cast<Scalar>();
  out.values = rows * grid.values * cols.transpose();
  return out;
}

template <typename Scalar>
BasicRiskGrid<Scalar> forecast(const BasicRiskGrid<Scalar>& grid, std::span<const MovementOrbit> orbits,
                               double horizon_days, const RiskParams& params = {}) {
  if (horizon_days < 0.0 || !std::isfinite(horizon_days)) throw NegativeHorizon();
  if (horizon_days == 0.0) return grid;
  const double speed = median_orbit_speed(orbits, grid.as_of, params.incubation_days, params.default_speed_kmpd);
  return blur(grid, speed * horizon_days, horizon_days);
}

/// RFC 7946 FeatureCollection, one Polygon per cell with value >= threshold,
/// row-major.
std::string export_geojson(const RiskGrid& grid, double threshold);

/// SHA-256 of salt and msisdn, first 16 hex digits.
std::string sender_key(const std::string& salt, const std::string& msisdn);

/// Case records plus per-sender orbits, mutated only through events.
class RiskEngine {
 public:
  explicit RiskEngine(RiskParams params = {}, std::string salt = {}) : params_(params), salt_(std::move(salt)) {}

  void set_sink(EventSink sink) { sink_ = std::move(sink); }
  const RiskParams& params() const { return params_; }

  /// Records located assessments; unlocated ones are ignored.
  void record_case(const CaseAssessment& a, const LocationEstimate& loc, const std::string& msisdn, Timestamp now);

  const std::vector<CaseRecord>& records() const { return records_; }
  std::vector<MovementOrbit> orbits() const;
  const MovementOrbit* orbit(const std::string& key) const;

  RiskGrid grid(const GridSpec& spec, Timestamp now) const { return build_grid<double>(records_, spec, now, params_); }
  RiskGrid forecast_grid(const GridSpec& spec, Timestamp now, double horizon_days) const;

  bool apply(const Event& e);
  nlohmann::json to_json() const;
  void load_json(const nlohmann::json& j);

 private:
  RiskParams params_;
  std::string salt_;
  std::vector<CaseRecord> records_;
  std::map<std::string, MovementOrbit> orbits_;
  EventSink sink_;
};

}  // namespace smsroute
