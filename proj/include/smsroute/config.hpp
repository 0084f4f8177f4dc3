#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "smsroute/geo.hpp"
#include "smsroute/recommender.hpp"
#include "smsroute/registry.hpp"
#include "smsroute/risk.hpp"
#include "smsroute/triage.hpp"

namespace smsroute {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Service configuration. Every key has a default; see data/default.conf.
struct Config {
  struct Gateway {
    std::string listen = "127.0.0.1:7070";
  } gateway;

  struct Triage {
    RubricWeights weights;
    PriorParams prior;
    int tune_step = 0;
  } triage;

  struct Registry {
    int ttl_hours = 24;
    int feedback_chain_max = 3;
  } registry;

  LocationRadii geo;

  struct Risk {
    double sigma_km = 10.0;
    double tau_days = 7.0;
    GridSpec grid;
    double default_speed_kmpd = 5.0;
    std::string hash_salt = "smsroute";
    int orbit_size = 10;
  } risk;

  std::uint64_t code_seed = 0x5eed;

  struct Data {
    std::filesystem::path lexicon;
    std::filesystem::path towers;
    std::filesystem::path gazetteer;
    std::filesystem::path facilities;
  } data;

  RegistryParams registry_params() const { return {std::chrono::hours{registry.ttl_hours}}; }
  RecommenderParams recommender_params() const { return {code_seed, registry.feedback_chain_max}; }
  RiskParams risk_params() const;

  nlohmann::json to_json() const;
};

/// `key = value` lines, optionally grouped under `[section]` headers;
/// `#` starts a comment. Relative data paths resolve against `base_dir`.
Config parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

}  // namespace smsroute
