#include "smsroute/service.hpp"
#include "smsroute/errors.hpp"

#include <fstream>
#include <iostream>

namespace smsroute {

namespace {

Event make_event(EventKind kind, Timestamp at, nlohmann::json data) {
  Event e;
  e.kind = kind;
  e.at = at;
  e.data = std::move(data);
  return e;
}

nlohmann::json weights_to_json(const RubricWeights& w) {
  return {{"fever_pts", w.fever_pts},
          {"common_symptom_pts", w.common_symptom_pts},
          {"hemorrhage_pts", w.hemorrhage_pts},
          {"epi_pts", w.epi_pts},
          {"spatial_prior_pts", w.spatial_prior_pts},
          {"likely_threshold", w.likely_threshold},
          {"possible_threshold", w.possible_threshold}};
}

RubricWeights weights_from_json(const nlohmann::json& j) {
  RubricWeights w;
  w.fever_pts = j.at("fever_pts").get<int>();
  w.common_symptom_pts = j.at("common_symptom_pts").get<int>();
  w.hemorrhage_pts = j.at("hemorrhage_pts").get<int>();
  w.epi_pts = j.at("epi_pts").get<int>();
  w.spatial_prior_pts = j.at("spatial_prior_pts").get<int>();
  w.likely_threshold = j.at("likely_threshold").get<int>();
  w.possible_threshold = j.at("possible_threshold").get<int>();
  return w;
}

nlohmann::json history_entry_to_json(const CaseHistory::Entry& e) {
  nlohmann::json j{{"label", to_string(e.label)}, {"at", to_epoch(e.at)}};
  if (e.point) {
    j["lat"] = e.point->lat();
    j["lon"] = e.point->lon();
  }
  return j;
}

CaseHistory::Entry history_entry_from_json(const nlohmann::json& j) {
  CaseHistory::Entry e;
  e.label = parse_label(j.at("label").get<std::string>()).value();
  e.at = from_epoch(j.at("at").get<std::int64_t>());
  if (j.contains("lat")) e.point = GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>());
  return e;
}

}  // namespace

StaticTables StaticTables::load(const Config& config) {
  StaticTables t;
  if (!config.data.lexicon.empty()) t.lexicon = Lexicon::load(config.data.lexicon);
  if (!config.data.towers.empty()) t.towers = load_towers(config.data.towers);
  if (!config.data.gazetteer.empty()) t.gazetteer = load_gazetteer(config.data.gazetteer);
  return t;
}

Core::Core(Config config, StaticTables tables)
    : config_(std::move(config)),
      tables_(std::move(tables)),
      weights_(config_.triage.weights),
      history_(config_.triage.prior.incubation_days),
      registry_(config_.registry_params()),
      recommender_(config_.recommender_params()),
      risk_(config_.risk_params(), config_.risk.hash_salt) {
  const auto sink = [this](const Event& e) { record(e); };
  registry_.set_sink(sink);
  recommender_.set_sink(sink);
  risk_.set_sink(sink);
}

void Core::record(const Event& e) {
  Event copy = e;
  if (log_) {
    last_seq_ = log_->append(copy);
  } else {
    copy.seq = ++last_seq_;
  }
}

void Core::emit(Event e) {
  apply(e);
  record(e);
}

void Core::bootstrap(Timestamp at) {
  clock_ = std::max(clock_, at);
  emit(make_event(EventKind::ConfigLoaded, clock_,
                  {{"config", config_.to_json()}, {"weights", weights_to_json(config_.triage.weights)}}));
  if (!config_.data.facilities.empty()) import_facilities(config_.data.facilities, clock_);
  if (log_) log_->flush();
}

std::size_t Core::import_facilities(const std::filesystem::path& seed, Timestamp at, LoadStats* stats) {
  const auto n = registry_.import_seed(seed, std::max(clock_, at), stats);
  if (log_) log_->flush();
  return n;
}

std::vector<OutboundMessage> Core::handle_frame(const InboundFrame& frame) {
  std::vector<OutboundMessage> out;
  try {
    const Timestamp now = std::max(clock_, frame.received_at);
    emit(make_event(EventKind::FrameReceived, now, {{"frame", frame.seq}, {"msisdn", frame.msisdn}}));

    const auto parsed = parse_message(frame.body, tables_.lexicon);
    switch (parsed.message.intent) {
      case Intent::SymptomReport:
        on_symptom_report(frame, std::get<SymptomReport>(parsed.message.payload), out);
        break;
      case Intent::Feedback:
        on_feedback(frame, std::get<Feedback>(parsed.message.payload), out);
        break;
      case Intent::FacilityUpdate:
        on_facility_update(frame, std::get<FacilityUpdate>(parsed.message.payload), out);
        break;
      case Intent::Unknown:
        out.push_back({frame.msisdn,
                       std::string(parsed.rejected_intent == Intent::FacilityUpdate ? reply_text::kBadUpdate
                                                                                    : reply_text::kHelp),
                       frame.seq});
        break;
    }
  } catch (const std::exception& e) {
    std::clog << "core: frame " << frame.seq << " failed: " << e.what() << '\n';
    out.clear();
    out.push_back({frame.msisdn, std::string(reply_text::kHelp), frame.seq});
  }

  for (const auto& msg : out) {
    nlohmann::json data{{"msisdn", msg.msisdn}, {"body", msg.body}};
    if (msg.in_reply_to) data["in_reply_to"] = *msg.in_reply_to;
    emit(make_event(EventKind::Reply, clock_, std::move(data)));
  }
  if (log_) log_->flush();
  return out;
}

void Core::on_symptom_report(const InboundFrame& frame, const SymptomReport& report,
                             std::vector<OutboundMessage>& out) {
  const auto loc = resolve_location(frame, report, tables_.towers, tables_.gazetteer, config_.geo);
  const bool prior = spatial_prior(loc, history_, clock_, config_.triage.prior);
  const auto assessment = score_report(report, prior, weights_, clock_);

  nlohmann::json symptoms = nlohmann::json::array(), epi = nlohmann::json::array();
  for (auto s : report.symptoms.items()) symptoms.push_back(to_string(s));
  for (auto f : report.epi_flags.items()) epi.push_back(to_string(f));
  nlohmann::json data{{"frame", frame.seq},
                      {"symptoms", symptoms},
                      {"epi", epi},
                      {"points", assessment.points},
                      {"score", assessment.score},
                      {"label", to_string(assessment.label)},
                      {"prior", prior},
                      {"source", to_string(loc.source)}};
  if (report.duration_days) data["duration_days"] = *report.duration_days;
  if (loc.point) {
    data["lat"] = loc.point->lat();
    data["lon"] = loc.point->lon();
    data["radius_km"] = loc.radius_km;
  }
  emit(make_event(EventKind::Assessment, clock_, std::move(data)));

  risk_.record_case(assessment, loc, frame.msisdn, clock_);
  const auto outcome = recommender_.recommend(assessment, loc, frame.msisdn, registry_, clock_);
  add_routing_replies(outcome, frame, out);
}

void Core::add_routing_replies(const RecommendOutcome& outcome, const InboundFrame& frame,
                               std::vector<OutboundMessage>& out) {
  const Recommendation* rec = nullptr;
  if (const auto* r = std::get_if<Routed>(&outcome)) rec = &r->rec;
  if (const auto* r = std::get_if<NoFacility>(&outcome)) rec = &r->rec;
  const Facility* facility = rec ? registry_.find(rec->facility_code) : nullptr;
  out.push_back(compose_patient_reply(outcome, facility ? facility->name : std::string{}, frame.msisdn, frame.seq));
  if (rec) {
    if (auto alert = compose_facility_alert(*rec, facility)) {
      out.push_back(std::move(*alert));
    } else if (rec->capacity_checked && rec->label != TriageLabel::Unlikely) {
      std::clog << "core: no contact for facility " << rec->facility_code << ", alert skipped\n";
    }
  }
}

void Core::on_feedback(const InboundFrame& frame, const Feedback& fb, std::vector<OutboundMessage>& out) {
  FeedbackResult result;
  try {
    result = recommender_.handle_feedback(fb, frame.msisdn, registry_, clock_);
  } catch (const UnknownCode&) {
    out.push_back({frame.msisdn, std::string(reply_text::kUnknownRef), frame.seq});
    return;
  } catch (const DuplicateFeedback&) {
    std::clog << "core: duplicate feedback for " << fb.code << " ignored\n";
    out.push_back({frame.msisdn, reply_text::already_received(fb.code), frame.seq});
    return;
  }

  if (config_.triage.tune_step > 0) {
    CaseAssessment original;
    original.label = result.original.label;
    original.points = result.original.points;
    const auto tuned = apply_feedback_tuning(fb, original, weights_, config_.triage.tune_step);
    if (!(tuned == weights_)) {
      emit(make_event(EventKind::WeightsTuned, clock_,
                      {{"ref", fb.code}, {"weights", weights_to_json(tuned)}}));
    }
  }

  if (fb.polarity == Polarity::Positive) {
    out.push_back({frame.msisdn, reply_text::thanks(fb.code), frame.seq});
  } else if (result.chain_exhausted) {
    out.push_back({frame.msisdn, reply_text::chain_closed(fb.code), frame.seq});
  } else if (result.reroute) {
    add_routing_replies(*result.reroute, frame, out);
  }
}

void Core::on_facility_update(const InboundFrame& frame, FacilityUpdate u, std::vector<OutboundMessage>& out) {
  if (u.facility_code.empty()) {
    const Facility* f = registry_.find_by_contact(frame.msisdn);
    if (!f) {
      out.push_back({frame.msisdn, reply_text::unknown_facility(""), frame.seq});
      return;
    }
    u.facility_code = f->code;
  }
  CapacityState state;
  try {
    state = registry_.apply_facility_update(u, clock_);
  } catch (const UnknownFacility& e) {
    out.push_back({frame.msisdn, reply_text::unknown_facility(e.code()), frame.seq});
    return;
  }
  const std::string body = reply_text::update_confirmation(u.facility_code, state, u.new_location);
  out.push_back({frame.msisdn, body, frame.seq});
  const Facility* f = registry_.find(u.facility_code);
  if (f && !f->contact_msisdn.empty() && f->contact_msisdn != frame.msisdn)
    out.push_back({f->contact_msisdn, body, std::nullopt});
}

void Core::apply(const Event& e) {
  if (e.seq) last_seq_ = e.seq;
  switch (e.kind) {
    case EventKind::ConfigLoaded:
      weights_ = weights_from_json(e.data.at("weights"));
      clock_ = std::max(clock_, e.at);
      return;
    case EventKind::FrameReceived:
      clock_ = e.at;
      frame_seq_ = e.data.at("frame").get<std::uint64_t>();
      return;
    case EventKind::Assessment: {
      CaseHistory::Entry entry;
      entry.label = parse_label(e.data.at("label").get<std::string>()).value();
      entry.at = e.at;
      if (e.data.contains("lat")) entry.point = GeoPoint(e.data.at("lat").get<double>(), e.data.at("lon").get<double>());
      history_.prune(e.at);
      history_.add(entry);
      return;
    }
    case EventKind::WeightsTuned:
      weights_ = weights_from_json(e.data.at("weights"));
      return;
    case EventKind::Reply:
      return;
    default:
      break;
  }
  if (registry_.apply(e) || recommender_.apply(e) || risk_.apply(e)) return;
  throw std::runtime_error("unhandled event kind " + std::string(to_string(e.kind)));
}

std::size_t Core::restore_from_log(const std::filesystem::path& log_path) {
  const auto events = EventLog::read(log_path);
  for (const auto& e : events) apply(e);
  return events.size();
}

nlohmann::json Core::state_json() const {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& e : history_.entries()) history.push_back(history_entry_to_json(e));
  return {{"clock", to_epoch(clock_)},
          {"frame_seq", frame_seq_},
          {"weights", weights_to_json(weights_)},
          {"history", history},
          {"registry", registry_.to_json()},
          {"recommender", recommender_.to_json()},
          {"risk", risk_.to_json()}};
}

void Core::save_snapshot(const std::filesystem::path& path) const {
  const nlohmann::json doc{{"version", kSnapshotVersion}, {"log_seq", last_seq_}, {"state", state_json()}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
  out << doc.dump() << '\n';
}

void Core::restore(const std::filesystem::path& snapshot, const std::optional<std::filesystem::path>& log_path) {
  std::ifstream in(snapshot);
  if (!in) throw FileNotFound(snapshot.string());
  const auto doc = nlohmann::json::parse(in);
  const int version = doc.at("version").get<int>();
  if (version != kSnapshotVersion)
    throw SnapshotVersionMismatch("snapshot version " + std::to_string(version) + ", expected " +
                                  std::to_string(kSnapshotVersion));
  const auto& s = doc.at("state");
  clock_ = from_epoch(s.at("clock").get<std::int64_t>());
  frame_seq_ = s.at("frame_seq").get<std::uint64_t>();
  weights_ = weights_from_json(s.at("weights"));
  history_ = CaseHistory(config_.triage.prior.incubation_days);
  for (const auto& e : s.at("history")) history_.add(history_entry_from_json(e));
  registry_.load_json(s.at("registry"));
  recommender_.load_json(s.at("recommender"));
  risk_.load_json(s.at("risk"));
  last_seq_ = doc.at("log_seq").get<std::uint64_t>();

  if (log_path) {
    const std::uint64_t after = last_seq_;
    for (const auto& e : EventLog::read(*log_path))
      if (e.seq > after) apply(e);
  }
}

}  // namespace smsroute
