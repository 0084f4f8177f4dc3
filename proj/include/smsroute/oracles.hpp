#pragma once

// Brute-force reference implementations for tests and simulator metrics.
// They deliberately share no distance, kernel or matching code with the
// production paths they check.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smsroute/lexicon.hpp"
#include "smsroute/registry.hpp"
#include "smsroute/risk.hpp"
#include "smsroute/triage.hpp"

namespace smsroute::oracle {

double great_circle_km(double lat1, double lon1, double lat2, double lon2);

struct FacilityRow {
  enum class State { Available, PresumedFull, Reported };
  std::string code;
  double lat = 0.0;
  double lon = 0.0;
  bool isolation = false;
  bool general = false;
  State state = State::Available;
  std::int64_t state_since = 0;  // epoch seconds
};

std::vector<FacilityRow> snapshot(const FacilityRegistry& registry);

/// Exhaustive argmin over eligible rows; equal distances go to the smaller code.
std::optional<std::string> nearest(double lat, double lon, TriageLabel label, const std::vector<FacilityRow>& rows,
                                   std::int64_t now, std::int64_t ttl_seconds);

/// Cell-by-record double loop.
Eigen::MatrixXd grid(const std::vector<CaseRecord>& records, const GridSpec& spec, std::int64_t now,
                     const RiskParams& params);

/// Direct 2-D convolution with a truncated, normalized Gaussian of
/// `sigma_cells`; cells outside the grid contribute nothing.
Eigen::MatrixXd convolve(const Eigen::MatrixXd& in, double sigma_cells);

/// Label straight from the case definition.
TriageLabel label(std::uint32_t symptom_mask, bool any_epi, bool prior, const RubricWeights& w);

/// Full-matrix edit distance.
std::size_t levenshtein(const std::string& a, const std::string& b);

/// Unique nearest single-word lexicon target within tolerance, if any.
std::optional<std::string> match_token(const std::string& token,
                                       const std::vector<std::pair<std::string, std::string>>& words);

}  // namespace smsroute::oracle
