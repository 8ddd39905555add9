#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smcgate/message.hpp"

namespace smcgate {

/// One per-source accountability record: which request was seen, what the
/// source decided, and whether a result came back.
struct TransparencyRecord {
  std::int64_t timestamp_ms = 0;
  std::string session_id;
  std::string original_request;  // byte-identical consumer request
  std::string consumer_id;
  bool contributed = false;      // false means vetoed
  bool result_delivered = false;

  friend bool operator==(const TransparencyRecord&,
                         const TransparencyRecord&) = default;
};

/// Append-only log. A decision record is written the moment the source
/// decides; result delivery is recorded later as a separate mark line, never
/// by rewriting the original record. The reconstructed view folds marks back
/// into the records.
class TransparencyLog {
 public:
  /// One decision per session; a second append for the same session throws.
  void append(TransparencyRecord record);

  void mark_delivered(const std::string& session_id, std::int64_t timestamp_ms);

  bool has_record(const std::string& session_id) const;

  /// Decision records with result_delivered folded in, in append order.
  std::vector<TransparencyRecord> records() const;

  std::size_t line_count() const { return lines_.size(); }

  /// Newline-delimited canonical records (decision and delivery lines).
  std::string serialize() const;
  static TransparencyLog parse(std::string_view text);

 private:
  struct Line {
    bool is_decision;
    TransparencyRecord record;    // valid when is_decision
    std::string session_id;       // valid when !is_decision
    std::int64_t timestamp_ms;
  };
  std::vector<Line> lines_;
};

}  // namespace smcgate
