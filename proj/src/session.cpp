#include "smcgate/session.hpp"

#include <algorithm>

namespace smcgate {

const char* to_string(AggregateKind kind) {
  switch (kind) {
    case AggregateKind::Sum: return "sum";
    case AggregateKind::Count: return "count";
    case AggregateKind::Average: return "average";
  }
  return "sum";
}

AggregateKind aggregate_from_string(std::string_view name) {
  if (name == "sum") return AggregateKind::Sum;
  if (name == "count") return AggregateKind::Count;
  if (name == "average") return AggregateKind::Average;
  throw Error(ErrorCode::UnknownKind, "aggregate " + std::string(name));
}

bool SessionSpec::has_participant(const PartyId& id) const {
  return std::any_of(participants.begin(), participants.end(),
                     [&](const Participant& p) { return p.party_id == id; });
}

std::vector<PartyId> SessionSpec::party_ids() const {
  std::vector<PartyId> ids;
  ids.reserve(participants.size());
  for (const auto& p : participants) ids.push_back(p.party_id);
  return ids;
}

void SessionSpec::validate() const {
  if (min_participants < 2) {
    throw Error(ErrorCode::ConfigError, "min_participants must be at least 2");
  }
  if (static_cast<int>(participants.size()) < min_participants) {
    throw Error(ErrorCode::ConfigError, "fewer participants than the session minimum");
  }
  auto ids = party_ids();
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::ConfigError, "participants must be distinct");
  }
}

Json SessionSpec::to_json() const {
  Json parts = Json::array();
  for (const auto& p : participants) {
    parts.push_back({{"endpoint", p.endpoint}, {"party_id", p.party_id}});
  }
  return Json{
      {"codec",
       {{"fraction_bits", codec.fraction_bits},
        {"half_range", std::to_string(codec.half_range)}}},
      {"data_selector",
       {{"data_type", data_selector.data_type},
        {"window",
         {{"end_ms", data_selector.window.end_ms},
          {"start_ms", data_selector.window.start_ms}}}}},
      {"min_participants", min_participants},
      {"original_request", original_request},
      {"participants", parts},
      {"protocol_id", to_string(protocol_id)},
      {"session_id", session_id},
  };
}

SessionSpec SessionSpec::from_json(const Json& j) {
  try {
    SessionSpec spec;
    spec.session_id = j.at("session_id").get<std::string>();
    for (const auto& p : j.at("participants")) {
      spec.participants.push_back({p.at("party_id").get<std::string>(),
                                   p.at("endpoint").get<std::string>()});
    }
    spec.data_selector.data_type =
        j.at("data_selector").at("data_type").get<std::string>();
    const auto& w = j.at("data_selector").at("window");
    spec.data_selector.window = {w.at("start_ms").get<std::int64_t>(),
                                 w.at("end_ms").get<std::int64_t>()};
    spec.protocol_id =
        aggregate_from_string(j.at("protocol_id").get<std::string>());
    spec.codec.fraction_bits = j.at("codec").at("fraction_bits").get<unsigned>();
    spec.codec.half_range =
        std::stoull(j.at("codec").at("half_range").get<std::string>());
    spec.original_request = j.at("original_request").get<std::string>();
    spec.min_participants = j.at("min_participants").get<int>();
    return spec;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedFrame,
                std::string("bad session spec: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::MalformedFrame,
                std::string("bad session spec: ") + e.what());
  }
}

const char* to_string(SessionPhase phase) {
  switch (phase) {
    case SessionPhase::Planned: return "Planned";
    case SessionPhase::Announced: return "Announced";
    case SessionPhase::Committed: return "Committed";
    case SessionPhase::Exchanging: return "Exchanging";
    case SessionPhase::Combining: return "Combining";
    case SessionPhase::Completed: return "Completed";
    case SessionPhase::Aborted: return "Aborted";
    case SessionPhase::Restarting: return "Restarting";
  }
  return "Planned";
}

bool SessionState::legal_transition(SessionPhase from, SessionPhase to) {
  if (to == SessionPhase::Aborted) return true;
  switch (from) {
    case SessionPhase::Planned:
      return to == SessionPhase::Announced;
    case SessionPhase::Announced:
      return to == SessionPhase::Committed || to == SessionPhase::Restarting;
    case SessionPhase::Committed:
      return to == SessionPhase::Exchanging || to == SessionPhase::Restarting;
    case SessionPhase::Exchanging:
      return to == SessionPhase::Combining || to == SessionPhase::Restarting;
    case SessionPhase::Combining:
      return to == SessionPhase::Completed;
    case SessionPhase::Restarting:
      return to == SessionPhase::Announced;
    case SessionPhase::Completed:
    case SessionPhase::Aborted:
      return false;
  }
  return false;
}

void SessionState::advance(SessionPhase to) {
  if (!legal_transition(phase_, to)) {
    throw Error(ErrorCode::IllegalTransition,
                std::string(to_string(phase_)) + " -> " + to_string(to));
  }
  if (to == SessionPhase::Completed && !partials_complete()) {
    throw Error(ErrorCode::IllegalTransition,
                "Completed requires a partial sum from every participant");
  }
  if (to == SessionPhase::Restarting) {
    ++restart_attempt_;
  }
  phase_ = to;
}

void SessionState::reset_for_restart(std::size_t participant_count) {
  advance(SessionPhase::Announced);
  participant_count_ = participant_count;
  commits_.clear();
  vetoes_.clear();
  partials_.clear();
}

void SessionState::record_commit(const PartyId& party) {
  if (phase_ != SessionPhase::Announced) {
    throw Error(ErrorCode::IllegalTransition, "commit outside Announced");
  }
  commits_.insert(party);
}

void SessionState::record_veto(const PartyId& party) {
  if (phase_ != SessionPhase::Announced) {
    throw Error(ErrorCode::IllegalTransition, "veto outside Announced");
  }
  vetoes_.insert(party);
}

void SessionState::record_partial(const PartyId& party, FieldElement value) {
  if (phase_ != SessionPhase::Exchanging) {
    throw Error(ErrorCode::IllegalTransition, "partial outside Exchanging");
  }
  partials_[party] = value;
}

}  // namespace smcgate
