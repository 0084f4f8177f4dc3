// Command-line front end: serve, replay, simulate, riskmap, facilities import.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "smsroute/config.hpp"
#include "smsroute/errors.hpp"
#include "smsroute/server.hpp"
#include "smsroute/service.hpp"
#include "smsroute/simulator.hpp"

namespace fs = std::filesystem;
using namespace smsroute;

namespace {

constexpr int kOk = 0;
constexpr int kOperational = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Config read_config(const std::string& path) { return path.empty() ? Config{} : load_config(path); }

Timestamp require_time(const std::string& text) {
  const auto t = parse_iso8601(text);
  if (!t) throw UsageError("not an ISO8601 UTC timestamp: " + text);
  return *t;
}

/// Folds an existing log into `core`; a missing or empty log leaves it fresh.
void open_state(Core& core, const std::string& log_path) {
  if (fs::exists(log_path) && fs::file_size(log_path) > 0) core.restore_from_log(log_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SMS triage and facility routing service"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "Run the TCP line gateway");
  std::string listen, serve_log, snapshot;
  serve->add_option("--listen", listen, "host:port (default from config)");
  serve->add_option("--log", serve_log, "Event log (created or continued)")->required();
  serve->add_option("--snapshot", snapshot, "Snapshot restored at start and written at shutdown");

  auto* replay = app.add_subcommand("replay", "Process a file of IN| frames");
  std::string input, output, replay_log;
  replay->add_option("--input", input, "Frame file")->required();
  replay->add_option("--output", output, "Reply file (default <input>.out)");
  replay->add_option("--log", replay_log, "Event log (default <input>.events.jsonl)");

  auto* simulate = app.add_subcommand("simulate", "Generate and score a synthetic scenario");
  std::string spec_path, out_dir;
  bool generate_only = false;
  simulate->add_option("--spec", spec_path, "Scenario spec file")->required();
  simulate->add_option("--out-dir", out_dir, "Output directory")->required();
  simulate->add_flag("--generate-only", generate_only, "Write the scenario without replaying it");

  auto* riskmap = app.add_subcommand("riskmap", "Export the risk surface as GeoJSON");
  std::string at_text, out_path, risk_log;
  double horizon = 0.0, threshold = 0.0;
  riskmap->add_option("--log", risk_log, "Event log holding the state")->required();
  riskmap->add_option("--at", at_text, "Evaluation time, ISO8601 UTC")->required();
  riskmap->add_option("--horizon", horizon, "Forecast horizon in days")->default_val(0.0);
  riskmap->add_option("--threshold", threshold, "Minimum cell risk to export")->default_val(0.0);
  riskmap->add_option("--out", out_path, "GeoJSON output file")->required();

  auto* facilities = app.add_subcommand("facilities", "Facility registry maintenance");
  facilities->require_subcommand(1);
  auto* import = facilities->add_subcommand("import", "Import a facility seed CSV");
  std::string seed_path, import_log;
  import->add_option("seed", seed_path, "code,name,lat,lon,contact,capabilities")->required();
  import->add_option("--log", import_log, "Event log to append to");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const Config config = read_config(config_path);

    if (*serve) {
      Core core(config, StaticTables::load(config));
      EventLog log(serve_log);
      if (!snapshot.empty() && fs::exists(snapshot)) {
        core.restore(snapshot, serve_log);
      } else {
        open_state(core, serve_log);
      }
      core.attach_log(&log);
      if (log.last_seq() == 0) core.bootstrap(Timestamp{});
      const auto [host, port] = parse_endpoint(listen.empty() ? config.gateway.listen : listen);
      LineServer server(core.handler(), host, port);
      server.stop_on_signals();
      std::clog << "listening on " << host << ':' << server.port() << '\n';
      server.run();
      log.flush();
      if (!snapshot.empty()) core.save_snapshot(snapshot);
      std::cout << "frames " << server.frames_seen() << '\n';
      return kOk;
    }

    if (*replay) {
      if (!fs::exists(input)) throw FileNotFound(input);
      Core core(config, StaticTables::load(config));
      EventLog log(replay_log.empty() ? input + ".events.jsonl" : replay_log, true);
      core.attach_log(&log);
      core.bootstrap(Timestamp{});
      const auto out = output.empty() ? replay_output_path(input) : fs::path(output);
      const auto summary = replay_file(input, core.handler(), out);
      log.flush();
      std::cout << "frames_in " << summary.frames_in << " replies_out " << summary.replies_out << " dropped "
                << summary.dropped << '\n'
                << "output " << out.string() << '\n';
      return kOk;
    }

    if (*simulate) {
      const auto spec = load_scenario_spec(spec_path);
      const auto g = generate(spec, out_dir);
      std::cout << "generated " << g.frames << " frames (" << g.reports << " reports, " << g.feedback
                << " feedback, " << g.updates << " updates)\n";
      if (!generate_only) std::cout << run(out_dir).to_json().dump(2) << '\n';
      return kOk;
    }

    if (*riskmap) {
      const Timestamp at = require_time(at_text);
      if (horizon < 0.0) throw UsageError("--horizon must be non-negative");
      Core core(config, StaticTables::load(config));
      if (!fs::exists(risk_log)) throw FileNotFound(risk_log);
      core.restore_from_log(risk_log);
      const auto grid = core.risk().grid(config.risk.grid, at);
      const auto ahead = forecast(grid, core.risk().orbits(), horizon, config.risk_params());
      std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + out_path);
      out << export_geojson(ahead, threshold) << '\n';
      std::cout << "wrote " << out_path << '\n';
      return kOk;
    }

    if (import->parsed()) {
      Core core(config, StaticTables::load(config));
      std::optional<EventLog> log;
      if (!import_log.empty()) {
        open_state(core, import_log);
        log.emplace(import_log);
        core.attach_log(&*log);
        if (log->last_seq() == 0) core.bootstrap(Timestamp{});
      }
      LoadStats stats;
      const auto n = core.import_facilities(seed_path, core.clock(), &stats);
      std::cout << n << '\n';
      if (stats.malformed) std::clog << stats.malformed << " malformed rows skipped\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kOperational;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOperational;
  }
  return kUsage;
}
