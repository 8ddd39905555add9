#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "smcgate/field.hpp"
#include "smcgate/message.hpp"
#include "smcgate/sharing.hpp"

namespace smcgate {

enum class AggregateKind { Sum, Count, Average };

const char* to_string(AggregateKind kind);
AggregateKind aggregate_from_string(std::string_view name);

struct TimeWindow {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  bool contains(std::int64_t t) const { return t >= start_ms && t <= end_ms; }
  bool degenerate() const { return end_ms <= start_ms; }

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct DataSelector {
  std::string data_type;
  TimeWindow window;

  friend bool operator==(const DataSelector&, const DataSelector&) = default;
};

struct Participant {
  PartyId party_id;
  std::string endpoint;

  friend bool operator==(const Participant&, const Participant&) = default;
};

struct AggregateResult {
  double value = 0.0;
  int contributors = 0;
};

/// Everything a source needs to take part in one session: who else is in,
/// what data is used, which protocol runs, and the consumer's original
/// request verbatim (sources audit the bytes, not a paraphrase).
struct SessionSpec {
  std::string session_id;
  std::vector<Participant> participants;
  DataSelector data_selector;
  AggregateKind protocol_id = AggregateKind::Sum;
  FixedPointCodec codec;
  std::string original_request;
  int min_participants = 3;

  bool has_participant(const PartyId& id) const;
  std::vector<PartyId> party_ids() const;
  void validate() const;

  Json to_json() const;
  static SessionSpec from_json(const Json& j);
};

enum class SessionPhase {
  Planned,
  Announced,
  Committed,
  Exchanging,
  Combining,
  Completed,
  Aborted,
  Restarting,
};

const char* to_string(SessionPhase phase);

/// Per-session state owned by the gateway's driver. Transitions follow
/// Planned -> Announced -> Committed -> Exchanging -> Combining -> Completed,
/// with Aborted reachable from anywhere and Restarting looping
/// Announced/Committed/Exchanging back to Announced.
class SessionState {
 public:
  explicit SessionState(std::size_t participant_count)
      : participant_count_(participant_count) {}

  SessionPhase phase() const { return phase_; }
  int restart_attempt() const { return restart_attempt_; }
  const std::string& abort_reason() const { return abort_reason_; }

  const std::set<PartyId>& commits() const { return commits_; }
  const std::set<PartyId>& vetoes() const { return vetoes_; }
  const std::map<PartyId, FieldElement>& partials() const { return partials_; }

  static bool legal_transition(SessionPhase from, SessionPhase to);

  /// Throws IllegalTransition on a forbidden move; Completed additionally
  /// requires a full partials map.
  void advance(SessionPhase to);

  /// Restarting -> Announced with fresh bookkeeping for the new attempt.
  void reset_for_restart(std::size_t participant_count);

  void record_commit(const PartyId& party);
  void record_veto(const PartyId& party);
  void record_partial(const PartyId& party, FieldElement value);
  void set_abort_reason(std::string reason) { abort_reason_ = std::move(reason); }

  bool all_committed() const { return commits_.size() == participant_count_; }
  bool partials_complete() const {
    return partials_.size() == participant_count_;
  }

 private:
  SessionPhase phase_ = SessionPhase::Planned;
  std::size_t participant_count_;
  int restart_attempt_ = 0;
  std::string abort_reason_;
  std::set<PartyId> commits_;
  std::set<PartyId> vetoes_;
  std::map<PartyId, FieldElement> partials_;
};

}  // namespace smcgate
