#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "smsroute/config.hpp"
#include "smsroute/event.hpp"
#include "smsroute/geo.hpp"
#include "smsroute/lexicon.hpp"
#include "smsroute/recommender.hpp"
#include "smsroute/registry.hpp"
#include "smsroute/risk.hpp"
#include "smsroute/triage.hpp"
#include "smsroute/wire.hpp"

namespace smsroute {

class SnapshotVersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StaticTables {
  Lexicon lexicon = Lexicon::builtin();
  TowerTable towers;
  Gazetteer gazetteer;

  /// Loads the files named in `config.data`; the built-in lexicon when none is given.
  static StaticTables load(const Config& config);
};

/// The single-threaded core: owns all mutable state and turns each inbound
/// frame into replies. State changes only through events, which are written
/// to the attached log before the replies are handed back.
class Core {
 public:
  static constexpr int kSnapshotVersion = 1;

  Core(Config config, StaticTables tables);
  Core(const Core&) = delete;
  Core& operator=(const Core&) = delete;

  /// Events go to `log` from now on (may be null).
  void attach_log(EventLog* log) { log_ = log; }

  /// First start: records the configuration and imports the seed facilities
  /// named in the config.
  void bootstrap(Timestamp at);
  std::size_t import_facilities(const std::filesystem::path& seed, Timestamp at, LoadStats* stats = nullptr);

  std::vector<OutboundMessage> handle_frame(const InboundFrame& frame);
  FrameHandler handler() {
    return [this](const InboundFrame& f) { return handle_frame(f); };
  }

  /// Folds one logged event into the state.
  void apply(const Event& e);
  /// Folds every event of a log file; returns how many were applied.
  std::size_t restore_from_log(const std::filesystem::path& log_path);

  nlohmann::json state_json() const;
  void save_snapshot(const std::filesystem::path& path) const;
  /// Loads a snapshot, then folds log entries written after it (if a log is given).
  void restore(const std::filesystem::path& snapshot, const std::optional<std::filesystem::path>& log_path);

  const Config& config() const { return config_; }
  const StaticTables& tables() const { return tables_; }
  const FacilityRegistry& registry() const { return registry_; }
  FacilityRegistry& registry() { return registry_; }
  const Recommender& recommender() const { return recommender_; }
  const RiskEngine& risk() const { return risk_; }
  const CaseHistory& history() const { return history_; }
  const RubricWeights& weights() const { return weights_; }
  Timestamp clock() const { return clock_; }
  std::uint64_t last_event_seq() const { return last_seq_; }

 private:
  void emit(Event e);
  void record(const Event& e);

  void on_symptom_report(const InboundFrame& frame, const SymptomReport& report, std::vector<OutboundMessage>& out);
  void on_feedback(const InboundFrame& frame, const Feedback& fb, std::vector<OutboundMessage>& out);
  void on_facility_update(const InboundFrame& frame, FacilityUpdate u, std::vector<OutboundMessage>& out);
  void add_routing_replies(const RecommendOutcome& outcome, const InboundFrame& frame,
                           std::vector<OutboundMessage>& out);

  Config config_;
  StaticTables tables_;
  RubricWeights weights_;
  CaseHistory history_;
  FacilityRegistry registry_;
  Recommender recommender_;
  RiskEngine risk_;
  Timestamp clock_{};
  std::uint64_t frame_seq_ = 0;
  std::uint64_t last_seq_ = 0;
  EventLog* log_ = nullptr;
};

}  // namespace smsroute
