#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "smsroute/config.hpp"
#include "smsroute/geo.hpp"

namespace smsroute {

class InvalidSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Synthetic population and message stream parameters. Read from a
/// `key = value` file whose keys are the field names below.
struct ScenarioSpec {
  std::uint64_t seed = 1;
  int n_patients = 200;
  int n_facilities = 12;
  int n_villages = 40;
  int n_towers = 15;
  GridSpec area{GeoPoint(7.0, -12.0), 0.1, 30, 30};
  double frac_likely = 0.3;
  double frac_possible = 0.3;
  double frac_noise = 0.4;
  double typo_rate = 0.0;
  double feedback_rate = 0.2;
  double repeat_rate = 0.2;  // patients who report again from elsewhere
  double tower_rate = 0.3;   // reports located by cell tower instead of village name
  int duration_days = 14;
  int updates_per_facility = 0;
  int beds_max = 5;

  void validate() const;
};

ScenarioSpec parse_scenario_spec(std::string_view text);
ScenarioSpec load_scenario_spec(const std::filesystem::path& path);

/// File names inside a scenario directory.
namespace scenario_files {
inline constexpr const char* kConfig = "scenario.conf";
inline constexpr const char* kFacilities = "facilities.csv";
inline constexpr const char* kTowers = "towers.csv";
inline constexpr const char* kGazetteer = "gazetteer.csv";
inline constexpr const char* kFrames = "frames.txt";
inline constexpr const char* kTruth = "truth.jsonl";
inline constexpr const char* kEvents = "events.jsonl";
inline constexpr const char* kGeoJson = "risk.geojson";
inline constexpr const char* kMetrics = "metrics.json";
}  // namespace scenario_files

struct GenerateSummary {
  std::size_t frames = 0;
  std::size_t reports = 0;
  std::size_t feedback = 0;
  std::size_t updates = 0;
};

/// Writes config, static tables, the replay file and ground truth into
/// `out_dir`. Feedback frames quote the codes the pipeline really issues,
/// so generation drives a scratch core over the stream as it goes.
GenerateSummary generate(const ScenarioSpec& spec, const std::filesystem::path& out_dir);

struct ScenarioMetrics {
  std::size_t frames_in = 0;
  std::size_t replies_out = 0;
  std::size_t reports = 0;
  double routed_fraction = 0.0;
  double classification_agreement = 0.0;
  std::size_t capacity_violations = 0;
  double mean_distance_km = 0.0;
  double risk_grid_oracle_max_rel_err = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

struct RunOptions {
  double geojson_horizon_days = 7.0;
  double geojson_threshold = 0.01;
  bool check_grid = true;
};

/// Replays `scenario.conf` + `frames.txt` from `dir` through a fresh core,
/// writing the event log, replies, a GeoJSON export and metrics.json next to
/// them, and scores the outcome against truth.jsonl and the oracles.
ScenarioMetrics run(const std::filesystem::path& dir, const RunOptions& options = {});

/// Relative error with denominators floored at the smallest normal double.
double max_relative_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want);

}  // namespace smsroute
