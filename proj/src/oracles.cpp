#include "smsroute/oracles.hpp"

#include <cmath>
#include <limits>

namespace smsroute::oracle {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kRadiusKm = 6371.0088;
double rad(double deg) { return deg * kPi / 180.0; }
}  // namespace

double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
  const double dlat = rad(lat2 - lat1);
  const double dlon = rad(lon2 - lon1);
  const double s1 = std::sin(dlat / 2.0), s2 = std::sin(dlon / 2.0);
  const double a = s1 * s1 + std::cos(rad(lat1)) * std::cos(rad(lat2)) * s2 * s2;
  return 2.0 * kRadiusKm * std::atan2(std::sqrt(a), std::sqrt(std::max(0.0, 1.0 - a)));
}

std::vector<FacilityRow> snapshot(const FacilityRegistry& registry) {
  std::vector<FacilityRow> rows;
  for (const auto& [code, f] : registry.facilities()) {
    FacilityRow r;
    r.code = code;
    r.lat = f.point.lat();
    r.lon = f.point.lon();
    r.isolation = f.capabilities.contains(Capability::Isolation);
    r.general = f.capabilities.contains(Capability::General);
    if (const auto* full = std::get_if<capacity::PresumedFull>(&f.capacity)) {
      r.state = FacilityRow::State::PresumedFull;
      r.state_since = to_epoch(full->since);
    } else if (const auto* rep = std::get_if<capacity::Reported>(&f.capacity)) {
      r.state = FacilityRow::State::Reported;
      r.state_since = to_epoch(rep->at);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::optional<std::string> nearest(double lat, double lon, TriageLabel label, const std::vector<FacilityRow>& rows,
                                   std::int64_t now, std::int64_t ttl_seconds) {
  const FacilityRow* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    const bool capable = label == TriageLabel::Unlikely ? (r.isolation || r.general) : r.isolation;
    if (!capable) continue;
    const bool full = r.state == FacilityRow::State::PresumedFull && now - r.state_since < ttl_seconds;
    if (full) continue;
    const double d = great_circle_km(lat, lon, r.lat, r.lon);
    if (!best || d < best_d - 1e-9 || (std::abs(d - best_d) <= 1e-9 && r.code < best->code)) {
      best = &r;
      best_d = d;
    }
  }
  if (!best) return std::nullopt;
  return best->code;
}

Eigen::MatrixXd grid(const std::vector<CaseRecord>& records, const GridSpec& spec, std::int64_t now,
                     const RiskParams& params) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.n_rows, spec.n_cols);
  for (int i = 0; i < spec.n_rows; ++i) {
    for (int j = 0; j < spec.n_cols; ++j) {
      const double clat = spec.origin.lat() + spec.cell_deg * (i + 0.5);
      const double clon = spec.origin.lon() + spec.cell_deg * (j + 0.5);
      double sum = 0.0;
      for (const auto& r : records) {
        const double age_days = static_cast<double>(now - to_epoch(r.at)) / 86400.0;
        if (age_days < 0.0 || age_days > 2.0 * params.incubation_days) continue;
        const double d = great_circle_km(clat, clon, r.point.lat(), r.point.lon());
        sum += r.weight * std::exp(-d * d / (2.0 * params.sigma_km * params.sigma_km)) *
               std::exp(-age_days / params.tau_days);
      }
      out(i, j) = sum;
    }
  }
  return out;
}

Eigen::MatrixXd convolve(const Eigen::MatrixXd& in, double sigma_cells) {
  if (!(sigma_cells > 0.0)) return in;
  const int half = static_cast<int>(std::floor(3.0 * sigma_cells + 1e-9));
  std::vector<double> w(2 * half + 1);
  double total = 0.0;
  for (int k = -half; k <= half; ++k) total += w[k + half] = std::exp(-(k * k) / (2.0 * sigma_cells * sigma_cells));
  for (double& v : w) v /= total;

  const int rows = static_cast<int>(in.rows()), cols = static_cast<int>(in.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      for (int a = 0; a < rows; ++a)
        for (int b = 0; b < cols; ++b) {
          const int di = a - i, dj = b - j;
          if (std::abs(di) > half || std::abs(dj) > half) continue;
          out(i, j) += w[di + half] * w[dj + half] * in(a, b);
        }
  return out;
}

TriageLabel label(std::uint32_t symptom_mask, bool any_epi, bool prior, const RubricWeights& w) {
  // Bit 0 is fever, bit 8 hemorrhage, the rest are the non-specific symptoms.
  const bool fever = symptom_mask & 1u;
  const bool bleeding = symptom_mask & (1u << 8);
  int common = 0;
  for (int bit = 1; bit <= 7; ++bit) common += (symptom_mask >> bit) & 1u;
  const int points = (fever ? w.fever_pts : 0) + (bleeding ? w.hemorrhage_pts : 0) + common * w.common_symptom_pts +
                     (any_epi ? w.epi_pts : 0) + (prior ? w.spatial_prior_pts : 0);
  if (fever && points >= w.likely_threshold) return TriageLabel::Likely;
  return points >= w.possible_threshold ? TriageLabel::Possible : TriageLabel::Unlikely;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

std::optional<std::string> match_token(const std::string& token,
                                       const std::vector<std::pair<std::string, std::string>>& words) {
  const std::size_t tol = token.size() <= 3 ? 0 : token.size() <= 5 ? 1 : 2;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<std::string> targets;
  for (const auto& [word, target] : words) {
    const std::size_t d = levenshtein(token, word);
    if (d > tol) continue;
    if (d < best) {
      best = d;
      targets = {target};
    } else if (d == best) {
      targets.push_back(target);
    }
  }
  if (targets.empty()) return std::nullopt;
  for (const auto& t : targets)
    if (t != targets.front()) return std::nullopt;
  return targets.front();
}

}  // namespace smsroute::oracle
