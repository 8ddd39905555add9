#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smcgate/consumer_node.hpp"
#include "smcgate/gateway_node.hpp"
#include "smcgate/sim_network.hpp"
#include "smcgate/source_node.hpp"

namespace smcgate {

enum class TransportKind { Sim, Socket };

const char* to_string(TransportKind kind);
TransportKind transport_from_string(std::string_view name);

struct ScenarioParams {
  int min_participants = 3;
  TimeMs heartbeat_ms = 1000;
  TimeMs liveness_timeout_ms = 3000;
  TimeMs announce_ms = 1000;
  TimeMs commit_timeout_ms = 2000;
  TimeMs exchange_timeout_ms = 2000;
  int max_restarts = 2;
  std::uint64_t field_modulus = Field::kDefaultModulus;
  unsigned fraction_bits = 16;
  std::uint64_t half_range = 1ULL << 40;
  TimeMs latency_ms = 10;
  TimeMs jitter_ms = 0;

  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

struct ScenarioSource {
  SourceMetadata metadata;
  SourcePolicy policy;
  std::vector<Reading> readings;

  friend bool operator==(const ScenarioSource&, const ScenarioSource&) = default;
};

struct ScenarioConsumer {
  std::string id;
  std::string key;
  std::vector<ScriptedRequest> requests;
};

/// A complete, reproducible experiment: topology, policies, scripted
/// readings and requests, grants, faults, and every tunable the nodes take.
struct Scenario {
  std::uint64_t seed = 0;
  TransportKind transport = TransportKind::Sim;
  TimeMs duration_ms = 10000;
  ScenarioParams params;
  NodeId gateway_id = "gateway";
  std::vector<ScenarioSource> sources;
  std::vector<ScenarioConsumer> consumers;
  std::vector<Grant> acl;
  std::vector<Fault> faults;
  std::optional<std::string> acl_file;
  std::optional<std::string> keys_file;

  /// Every id referenced by requests, faults, and grants must exist.
  void validate() const;

  Json to_json() const;
  static Scenario from_json(const Json& j);

  static Scenario load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace smcgate
