#include "smsroute/simulator.hpp"
#include "smsroute/errors.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <queue>
#include <regex>
#include <set>
#include <sstream>

#include "smsroute/oracles.hpp"
#include "smsroute/random.hpp"
#include "smsroute/service.hpp"

namespace smsroute {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  in.imbue(std::locale::classic());
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw InvalidSpec(key + ": not a number: " + value);
  return out;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.imbue(std::locale::classic());
  out << std::setprecision(17);
  return out;
}

// Independent streams per concern so that changing one count does not
// reshuffle everything else.
enum Stream : std::uint64_t { kFacilities = 1, kPlaces, kPatients, kTypos, kFeedback, kUpdates };
CounterRng stream(const ScenarioSpec& spec, Stream s) { return CounterRng(mix64(spec.seed * 0x100 + s)); }

GeoPoint random_point(CounterRng& rng, const GridSpec& area) {
  const double lat = rng.uniform(area.origin.lat(), area.origin.lat() + area.n_rows * area.cell_deg);
  const double lon = rng.uniform(area.origin.lon(), area.origin.lon() + area.n_cols * area.cell_deg);
  return GeoPoint(lat, lon);
}

std::string padded(std::uint64_t n, int width) {
  std::ostringstream s;
  s << std::setw(width) << std::setfill('0') << n;
  return s.str();
}

// Pronounceable names that stay clear of the symptom vocabulary and of each
// other, so a village name always resolves to its own entry.
std::vector<std::string> village_names(CounterRng& rng, int n, const Lexicon& lexicon) {
  static constexpr std::array<std::string_view, 20> kSyllables = {"ko", "ba", "lu", "ma", "ndi", "sa", "to",
                                                                   "gbe", "ya", "ke", "wo", "la", "mo", "ri",
                                                                   "fa", "zu", "pe", "nyi", "do", "ka"};
  std::vector<std::string> names;
  int attempts = 0;
  while (static_cast<int>(names.size()) < n) {
    if (++attempts > 100000) throw InvalidSpec("n_villages: cannot generate that many distinct names");
    std::string name;
    const int parts = 3 + static_cast<int>(rng.below(2));
    for (int i = 0; i < parts; ++i) name += kSyllables[rng.below(kSyllables.size())];
    if (lexicon.match_token(name)) continue;
    bool clash = false;
    for (const auto& other : names)
      if (oracle::levenshtein(name, other) < 5) clash = true;
    if (!clash) names.push_back(name);
  }
  return names;
}

std::string typo(const std::string& word, CounterRng& rng) {
  for (;;) {
    std::string out = word;
    const auto pos = rng.below(word.size());
    const char letter = static_cast<char>('a' + rng.below(26));
    switch (rng.below(3)) {
      case 0: out[pos] = letter; break;
      case 1: out.erase(pos, 1); break;
      default: out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), letter); break;
    }
    if (out != word) return out;
  }
}

constexpr std::array<std::string_view, 5> kNoise = {"hello", "good morning", "who is this", "thank you",
                                                    "please call me"};

struct Frame {
  Timestamp at{};
  std::uint64_t order = 0;
  InboundFrame frame;
  nlohmann::json truth;
  bool wants_feedback = false;
  bool positive = true;
};

struct Later {
  bool operator()(const Frame& a, const Frame& b) const {
    return std::tie(a.at, a.order) > std::tie(b.at, b.order);
  }
};

std::string config_text(const ScenarioSpec& spec) {
  std::ostringstream c;
  c.imbue(std::locale::classic());
  c << std::setprecision(17);
  c << "# generated scenario configuration\n"
    << "[risk]\n"
    << "origin_lat = " << spec.area.origin.lat() << "\n"
    << "origin_lon = " << spec.area.origin.lon() << "\n"
    << "cell_deg = " << spec.area.cell_deg << "\n"
    << "n_rows = " << spec.area.n_rows << "\n"
    << "n_cols = " << spec.area.n_cols << "\n"
    << "[data]\n"
    << "facilities = " << scenario_files::kFacilities << "\n"
    << "towers = " << scenario_files::kTowers << "\n"
    << "gazetteer = " << scenario_files::kGazetteer << "\n";
  return c.str();
}

std::optional<std::string> quoted_ref(const std::string& body) {
  static const std::regex ref("REF ([A-Z2-7]{6})");
  std::smatch m;
  if (std::regex_search(body, m, ref)) return m[1].str();
  return std::nullopt;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (n_patients < 0) throw InvalidSpec("n_patients must be >= 0");
  if (n_facilities < 1) throw InvalidSpec("n_facilities must be >= 1");
  if (n_villages < 1) throw InvalidSpec("n_villages must be >= 1");
  if (n_towers < 1) throw InvalidSpec("n_towers must be >= 1");
  if (area.n_rows < 1 || area.n_cols < 1 || !(area.cell_deg > 0.0)) throw InvalidSpec("area must be non-empty");
  if (!GeoPoint::valid(area.origin.lat() + area.n_rows * area.cell_deg,
                       area.origin.lon() + area.n_cols * area.cell_deg))
    throw InvalidSpec("area leaves valid coordinates");
  for (double f : {frac_likely, frac_possible, frac_noise, typo_rate, feedback_rate, repeat_rate, tower_rate})
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidSpec("rates and fractions must lie in [0, 1]");
  if (std::abs(frac_likely + frac_possible + frac_noise - 1.0) > 1e-9)
    throw InvalidSpec("frac_likely + frac_possible + frac_noise must equal 1");
  if (duration_days < 1) throw InvalidSpec("duration_days must be >= 1");
  if (updates_per_facility < 0) throw InvalidSpec("updates_per_facility must be >= 0");
  if (beds_max < 1) throw InvalidSpec("beds_max must be >= 1");
}

ScenarioSpec parse_scenario_spec(std::string_view text) {
  ScenarioSpec s;
  double origin_lat = s.area.origin.lat(), origin_lon = s.area.origin.lon();
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> keys = {
      {"seed", [&](auto& k, auto& v) { s.seed = parse_number<std::uint64_t>(k, v); }},
      {"n_patients", [&](auto& k, auto& v) { s.n_patients = parse_number<int>(k, v); }},
      {"n_facilities", [&](auto& k, auto& v) { s.n_facilities = parse_number<int>(k, v); }},
      {"n_villages", [&](auto& k, auto& v) { s.n_villages = parse_number<int>(k, v); }},
      {"n_towers", [&](auto& k, auto& v) { s.n_towers = parse_number<int>(k, v); }},
      {"origin_lat", [&](auto& k, auto& v) { origin_lat = parse_number<double>(k, v); }},
      {"origin_lon", [&](auto& k, auto& v) { origin_lon = parse_number<double>(k, v); }},
      {"cell_deg", [&](auto& k, auto& v) { s.area.cell_deg = parse_number<double>(k, v); }},
      {"n_rows", [&](auto& k, auto& v) { s.area.n_rows = parse_number<int>(k, v); }},
      {"n_cols", [&](auto& k, auto& v) { s.area.n_cols = parse_number<int>(k, v); }},
      {"frac_likely", [&](auto& k, auto& v) { s.frac_likely = parse_number<double>(k, v); }},
      {"frac_possible", [&](auto& k, auto& v) { s.frac_possible = parse_number<double>(k, v); }},
      {"frac_noise", [&](auto& k, auto& v) { s.frac_noise = parse_number<double>(k, v); }},
      {"typo_rate", [&](auto& k, auto& v) { s.typo_rate = parse_number<double>(k, v); }},
      {"feedback_rate", [&](auto& k, auto& v) { s.feedback_rate = parse_number<double>(k, v); }},
      {"repeat_rate", [&](auto& k, auto& v) { s.repeat_rate = parse_number<double>(k, v); }},
      {"tower_rate", [&](auto& k, auto& v) { s.tower_rate = parse_number<double>(k, v); }},
      {"duration_days", [&](auto& k, auto& v) { s.duration_days = parse_number<int>(k, v); }},
      {"updates_per_facility", [&](auto& k, auto& v) { s.updates_per_facility = parse_number<int>(k, v); }},
      {"beds_max", [&](auto& k, auto& v) { s.beds_max = parse_number<int>(k, v); }},
  };
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidSpec("expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = keys.find(key);
    if (it == keys.end()) throw InvalidSpec("unknown key " + key);
    it->second(key, value);
  }
  if (!GeoPoint::valid(origin_lat, origin_lon)) throw InvalidSpec("origin out of range");
  s.area.origin = GeoPoint(origin_lat, origin_lon);
  s.validate();
  return s;
}

ScenarioSpec load_scenario_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_spec(buf.str());
}

GenerateSummary generate(const ScenarioSpec& spec, const fs::path& out_dir) {
  spec.validate();
  fs::create_directories(out_dir);
  const Lexicon& lexicon = Lexicon::builtin();

  // Facilities: the first always isolates, so LIKELY cases have somewhere to go.
  auto frng = stream(spec, kFacilities);
  struct Site {
    std::string code, contact;
    GeoPoint point;
  };
  std::vector<Site> sites;
  {
    auto out = open_out(out_dir / scenario_files::kFacilities);
    out << "code,name,lat,lon,contact,capabilities\n";
    for (int i = 0; i < spec.n_facilities; ++i) {
      Site s{"F" + padded(i + 1, 3), "+23177" + padded(i + 1, 6), random_point(frng, spec.area)};
      const double u = frng.uniform();
      const char* caps = i == 0 || u < 0.6 ? "ISOLATION;GENERAL" : (u < 0.8 ? "ISOLATION" : "GENERAL");
      out << s.code << ",CLINIC " << s.code << ',' << s.point.lat() << ',' << s.point.lon() << ',' << s.contact
          << ',' << caps << '\n';
      sites.push_back(std::move(s));
    }
  }

  auto prng = stream(spec, kPlaces);
  std::vector<std::pair<std::string, GeoPoint>> towers, villages;
  {
    auto out = open_out(out_dir / scenario_files::kTowers);
    out << "tower_id,lat,lon\n";
    for (int i = 0; i < spec.n_towers; ++i) {
      towers.emplace_back("SIM-T" + padded(i + 1, 3), random_point(prng, spec.area));
      out << towers.back().first << ',' << towers.back().second.lat() << ',' << towers.back().second.lon() << '\n';
    }
  }
  {
    auto out = open_out(out_dir / scenario_files::kGazetteer);
    out << "name,kind,lat,lon\n";
    for (const auto& name : village_names(prng, spec.n_villages, lexicon)) {
      villages.emplace_back(name, random_point(prng, spec.area));
      out << name << ",village," << villages.back().second.lat() << ',' << villages.back().second.lon() << '\n';
    }
  }
  {
    auto out = open_out(out_dir / scenario_files::kConfig);
    out << config_text(spec);
  }

  // Phrases per target, from the lexicon itself.
  std::map<std::string, std::vector<const Lexicon::Entry*>> phrases;
  for (const auto& e : lexicon.entries()) phrases[target_name(e.target)].push_back(&e);

  const Timestamp start = *parse_iso8601("2014-10-20T00:00:00Z");
  const auto span_s = static_cast<std::uint64_t>(spec.duration_days) * 86400;
  std::priority_queue<Frame, std::vector<Frame>, Later> queue;
  std::uint64_t order = 0;

  auto trng = stream(spec, kTypos);
  auto say = [&](const LexiconTarget& target, CounterRng& rng) {
    const auto& options = phrases.at(target_name(target));
    const auto* entry = options[rng.below(options.size())];
    std::string text;
    for (const auto& tok : entry->tokens) {
      if (!text.empty()) text += ' ';
      text += tok.size() >= 5 && trng.chance(spec.typo_rate) ? typo(tok, trng) : tok;
    }
    return text;
  };

  auto rng = stream(spec, kPatients);
  auto fbrng = stream(spec, kFeedback);
  const RubricWeights weights;
  for (int p = 0; p < spec.n_patients; ++p) {
    const std::string msisdn = "+23188" + padded(p + 1, 7);
    const double u = rng.uniform();
    const int reports = 1 + (rng.chance(spec.repeat_rate) ? 1 : 0);
    const bool noise = u >= spec.frac_likely + spec.frac_possible;
    const bool chatter = noise && rng.chance(0.5);
    for (int r = 0; r < reports; ++r) {
      Frame f;
      f.at = start + std::chrono::seconds(rng.below(span_s));
      f.order = order++;
      f.frame.msisdn = msisdn;
      f.frame.received_at = f.at;
      if (chatter) {
        f.frame.body = std::string(kNoise[rng.below(kNoise.size())]);
        f.truth = {{"kind", "noise"}};
        queue.push(std::move(f));
        continue;
      }

      SymptomSet symptoms;
      EpiFlagSet epi;
      auto common = [&](int n) {
        while (static_cast<int>(symptoms.size()) < n + (symptoms.contains(Symptom::Fever) ? 1 : 0) +
                                                        (symptoms.contains(Symptom::Hemorrhage) ? 1 : 0))
          symptoms.insert(static_cast<Symptom>(1 + rng.below(7)));
      };
      if (u < spec.frac_likely) {
        symptoms.insert(Symptom::Fever);
        symptoms.insert(Symptom::Hemorrhage);
        common(1 + static_cast<int>(rng.below(3)));
        if (rng.chance(0.5)) epi.insert(static_cast<EpiFlag>(rng.below(3)));
      } else if (!noise) {
        if (rng.chance(0.5)) {
          symptoms.insert(Symptom::Fever);
          common(1);
        } else {
          common(3);
        }
      } else {
        common(1 + static_cast<int>(rng.below(2)));
      }

      std::vector<std::string> words;
      for (auto s : symptoms.items()) words.push_back(say(s, rng));
      for (auto e : epi.items()) words.push_back(say(e, rng));
      // Shuffle so the parser sees varied orders.
      for (std::size_t i = words.size(); i > 1; --i) std::swap(words[i - 1], words[rng.below(i)]);
      if (rng.chance(0.3)) words.push_back(std::to_string(1 + rng.below(10)) + " days");

      GeoPoint where;
      if (rng.chance(spec.tower_rate)) {
        const auto& t = towers[rng.below(towers.size())];
        f.frame.tower_id = t.first;
        where = t.second;
      } else {
        const auto& v = villages[rng.below(villages.size())];
        words.push_back("village " + v.first);
        where = v.second;
      }
      std::string body;
      for (const auto& w : words) body += (body.empty() ? "" : " ") + w;
      f.frame.body = body;

      nlohmann::json sym = nlohmann::json::array(), ep = nlohmann::json::array();
      for (auto s : symptoms.items()) sym.push_back(to_string(s));
      for (auto e : epi.items()) ep.push_back(to_string(e));
      f.truth = {{"kind", "report"},
                 {"symptoms", sym},
                 {"symptom_mask", symptoms.mask()},
                 {"epi", ep},
                 {"lat", where.lat()},
                 {"lon", where.lon()},
                 {"label", to_string(oracle::label(symptoms.mask(), !epi.empty(), false, weights))}};
      f.wants_feedback = fbrng.chance(spec.feedback_rate);
      f.positive = fbrng.chance(0.7);
      queue.push(std::move(f));
    }
  }

  auto urng = stream(spec, kUpdates);
  for (const auto& s : sites) {
    for (int k = 0; k < spec.updates_per_facility; ++k) {
      Frame f;
      f.at = start + std::chrono::seconds(urng.below(span_s));
      f.order = order++;
      f.frame.msisdn = s.contact;
      f.frame.received_at = f.at;
      const auto beds = 1 + urng.below(static_cast<std::uint64_t>(spec.beds_max));
      f.frame.body = "FAC " + s.code + " BEDS " + std::to_string(beds);
      f.truth = {{"kind", "update"}, {"facility", s.code}, {"beds", beds}};
      queue.push(std::move(f));
    }
  }

  // Drive a scratch core over the stream so feedback can quote real codes.
  Config config = load_config(out_dir / scenario_files::kConfig);
  Core core(config, StaticTables::load(config));
  core.bootstrap(Timestamp{});

  GenerateSummary summary;
  auto frames_out = open_out(out_dir / scenario_files::kFrames);
  auto truth_out = open_out(out_dir / scenario_files::kTruth);
  while (!queue.empty()) {
    Frame f = queue.top();
    queue.pop();
    f.frame.seq = ++summary.frames;
    const std::string kind = f.truth.at("kind").get<std::string>();
    if (kind == "report") ++summary.reports;
    if (kind == "feedback") ++summary.feedback;
    if (kind == "update") ++summary.updates;
    frames_out << encode_frame(f.frame);
    f.truth["frame"] = f.frame.seq;
    f.truth["msisdn"] = f.frame.msisdn;
    truth_out << f.truth.dump() << '\n';

    const auto replies = core.handle_frame(f.frame);
    if (!f.wants_feedback) continue;
    for (const auto& reply : replies) {
      if (reply.msisdn != f.frame.msisdn) continue;
      const auto code = quoted_ref(reply.body);
      if (!code) continue;
      Frame fb;
      fb.at = f.at + std::chrono::seconds(600 + fbrng.below(12 * 3600));
      fb.order = order++;
      fb.frame.msisdn = f.frame.msisdn;
      fb.frame.received_at = fb.at;
      fb.frame.body = std::string(f.positive ? "YES " : "NO ") + *code;
      fb.truth = {{"kind", "feedback"}, {"ref", *code}, {"positive", f.positive}};
      queue.push(std::move(fb));
    }
  }
  return summary;
}

nlohmann::json ScenarioMetrics::to_json() const {
  return {{"frames_in", frames_in},
          {"replies_out", replies_out},
          {"reports", reports},
          {"routed_fraction", routed_fraction},
          {"classification_agreement", classification_agreement},
          {"capacity_violations", capacity_violations},
          {"mean_distance_km", mean_distance_km},
          {"risk_grid_oracle_max_rel_err", risk_grid_oracle_max_rel_err}};
}

double max_relative_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  if (got.rows() != want.rows() || got.cols() != want.cols()) return std::numeric_limits<double>::infinity();
  const Eigen::ArrayXXd floor = want.array().abs().max(std::numeric_limits<double>::min());
  if (got.size() == 0) return 0.0;
  return ((got - want).array().abs() / floor).maxCoeff();
}

ScenarioMetrics run(const fs::path& dir, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const Config config = load_config(dir / scenario_files::kConfig);

  std::map<std::uint64_t, nlohmann::json> truth;
  {
    std::ifstream in(dir / scenario_files::kTruth);
    if (!in) throw FileNotFound((dir / scenario_files::kTruth).string());
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) {
        auto j = nlohmann::json::parse(line);
        truth.emplace(j.at("frame").get<std::uint64_t>(), std::move(j));
      }
  }

  Core core(config, StaticTables::load(config));
  const fs::path events_path = dir / scenario_files::kEvents;
  {
    EventLog log(events_path, true);
    core.attach_log(&log);
    core.bootstrap(Timestamp{});
    const auto summary = replay_file(dir / scenario_files::kFrames, core.handler());
    core.attach_log(nullptr);

    ScenarioMetrics m;
    m.frames_in = summary.frames_in;
    m.replies_out = summary.replies_out;

    // Join the log against ground truth.
    RubricWeights weights = config.triage.weights;
    const std::int64_t ttl_s = std::int64_t{config.registry.ttl_hours} * 3600;
    struct Window {
      long beds = 0;
      long used = 0;
      std::optional<std::int64_t> full_since;
    };
    std::map<std::string, std::optional<Window>> windows;
    std::uint64_t frame = 0;
    std::set<std::uint64_t> routed_frames, assessed_frames;
    std::size_t agree = 0;
    double distance = 0.0;
    std::size_t routed = 0;
    for (const auto& e : EventLog::read(events_path)) {
      const std::int64_t at = to_epoch(e.at);
      switch (e.kind) {
        case EventKind::ConfigLoaded:
        case EventKind::WeightsTuned: {
          const auto& w = e.data.at("weights");
          weights.likely_threshold = w.at("likely_threshold").get<int>();
          weights.possible_threshold = w.at("possible_threshold").get<int>();
          break;
        }
        case EventKind::FrameReceived:
          frame = e.data.at("frame").get<std::uint64_t>();
          break;
        case EventKind::Assessment: {
          const auto it = truth.find(frame);
          if (it == truth.end() || it->second.at("kind") != "report") break;
          assessed_frames.insert(frame);
          const auto want = oracle::label(it->second.at("symptom_mask").get<std::uint32_t>(),
                                          !it->second.at("epi").empty(), e.data.at("prior").get<bool>(), weights);
          if (to_string(want) == e.data.at("label").get<std::string>()) ++agree;
          break;
        }
        case EventKind::Recommendation: {
          const auto it = truth.find(frame);
          if (it == truth.end() || it->second.at("kind") != "report") break;
          if (e.data.at("capacity_checked").get<bool>()) {
            routed_frames.insert(frame);
            distance += e.data.at("distance_km").get<double>();
            ++routed;
          }
          break;
        }
        case EventKind::FacilityUpdate:
          if (e.data.contains("beds")) {
            const long beds = e.data.at("beds").get<long>();
            windows[e.data.at("facility").get<std::string>()] = beds > 0 ? Window{beds, 0, std::nullopt} : Window{0, 0, at};
          }
          break;
        case EventKind::FeedbackNegative:
          windows[e.data.at("facility").get<std::string>()] = Window{0, 0, at};
          break;
        case EventKind::FeedbackPositive:
        case EventKind::StateExpired:
          windows[e.data.at("facility").get<std::string>()].reset();
          break;
        case EventKind::RecommendationIssued: {
          auto& w = windows[e.data.at("facility").get<std::string>()];
          if (!w) break;
          if (w->full_since) {
            if (at - *w->full_since < ttl_s) ++m.capacity_violations;
          } else if (++w->used > w->beds) {
            ++m.capacity_violations;
          }
          break;
        }
        default:
          break;
      }
    }
    for (const auto& [f, t] : truth)
      if (t.at("kind") == "report") ++m.reports;
    m.routed_fraction = m.reports ? static_cast<double>(routed_frames.size()) / m.reports : 1.0;
    m.classification_agreement = assessed_frames.empty() ? 1.0 : static_cast<double>(agree) / assessed_frames.size();
    if (assessed_frames.size() != m.reports && m.reports)
      m.classification_agreement = static_cast<double>(agree) / m.reports;
    m.mean_distance_km = routed ? distance / routed : 0.0;

    const GridSpec& spec = config.risk.grid;
    const RiskGrid grid = core.risk().grid(spec, core.clock());
    if (options.check_grid) {
      const auto want = oracle::grid(core.risk().records(), spec, to_epoch(core.clock()), config.risk_params());
      m.risk_grid_oracle_max_rel_err = max_relative_error(grid.values, want);
    }
    {
      auto out = open_out(dir / scenario_files::kGeoJson);
      out << export_geojson(forecast(grid, core.risk().orbits(), options.geojson_horizon_days, config.risk_params()),
                            options.geojson_threshold)
          << '\n';
    }
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto out = open_out(dir / scenario_files::kMetrics);
    out << m.to_json().dump(2) << '\n';
    return m;
  }
}

}  // namespace smsroute
