#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smcgate/message.hpp"
#include "smcgate/session.hpp"

namespace smcgate {

struct DataTypeInfo {
  std::string name;
  std::string unit;
  std::string description;

  friend bool operator==(const DataTypeInfo&, const DataTypeInfo&) = default;
};

/// What a source tells the gateway during setup: where it sits, what it can
/// measure, and which aggregates it will take part in.
struct SourceMetadata {
  std::string source_id;
  std::string scope;  // location tag, matched against request scope globs
  std::vector<DataTypeInfo> data_types;
  std::vector<AggregateKind> supported_protocols;

  bool offers(const std::string& data_type) const;
  bool supports(AggregateKind kind) const;
  void validate() const;

  Json to_json() const;
  static SourceMetadata from_json(const Json& j);

  friend bool operator==(const SourceMetadata&, const SourceMetadata&) = default;
};

enum class AnnounceAction { NewSource, Refresh, Replace, Reject };

/// The gateway's registry of currently reachable sources. Liveness is
/// heartbeat-based; only live entries are eligible session participants.
class MetadataDirectory {
 public:
  explicit MetadataDirectory(std::int64_t liveness_timeout_ms = 3000)
      : liveness_timeout_ms_(liveness_timeout_ms) {}

  struct Entry {
    SourceMetadata metadata;
    std::string endpoint;
    std::int64_t last_heartbeat_ms = 0;
  };

  /// Announce handling rule: unknown id inserts, a known id at the same
  /// endpoint refreshes, a stale entry is replaced by a new endpoint, and a
  /// duplicate id at a different live endpoint is rejected.
  AnnounceAction classify_announce(const std::string& source_id,
                                   const std::string& endpoint,
                                   std::int64_t now_ms) const;

  void upsert(SourceMetadata metadata, const std::string& endpoint,
              std::int64_t now_ms);
  void record_heartbeat(const std::string& source_id, std::int64_t now_ms);
  void mark_dead(const std::string& source_id);
  void clear() { entries_.clear(); }

  bool contains(const std::string& source_id) const;
  bool is_live(const std::string& source_id, std::int64_t now_ms) const;
  const Entry* find(const std::string& source_id) const;
  std::size_t size() const { return entries_.size(); }

  /// Live sources offering the data type in a matching scope that support
  /// the aggregate; ordered by source id, so session plans are stable.
  std::vector<const Entry*> live_matching(const std::string& data_type,
                                          const std::string& scope_glob,
                                          AggregateKind aggregate,
                                          std::int64_t now_ms) const;

  bool knows_data_type(const std::string& data_type, std::int64_t now_ms) const;

  /// Consumer-facing projection: data types mapped to the scopes offering
  /// them plus the supported aggregates. Never includes source identities or
  /// endpoints.
  Json listing(std::int64_t now_ms) const;

 private:
  std::map<std::string, Entry> entries_;
  std::int64_t liveness_timeout_ms_;
};

}  // namespace smcgate
