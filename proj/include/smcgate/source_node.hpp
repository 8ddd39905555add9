#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "smcgate/metadata.hpp"
#include "smcgate/policy.hpp"
#include "smcgate/protocol.hpp"
#include "smcgate/transparency.hpp"
#include "smcgate/transport.hpp"

namespace smcgate {

struct Reading {
  std::string data_type;
  TimeMs time_ms = 0;
  double value = 0.0;

  friend bool operator==(const Reading&, const Reading&) = default;
};

/// Where a source's local values come from. Sensor drivers are out of scope;
/// tests script readings and demos load them from a file.
class ReadingProvider {
 public:
  virtual ~ReadingProvider() = default;
  virtual std::optional<double> reading_for(const DataSelector& selector) = 0;
};

/// Returns the latest scripted reading of the requested type whose timestamp
/// falls inside the window.
class ScriptedReadings final : public ReadingProvider {
 public:
  explicit ScriptedReadings(std::vector<Reading> readings)
      : readings_(std::move(readings)) {}

  static std::shared_ptr<ScriptedReadings> from_file(const std::string& path);

  std::optional<double> reading_for(const DataSelector& selector) override;

 private:
  std::vector<Reading> readings_;
};

struct SourceConfig {
  SourceMetadata metadata;
  SourcePolicy policy;
  TimeMs announce_interval_ms = 1000;
  TimeMs heartbeat_interval_ms = 1000;
  TimeMs liveness_timeout_ms = 3000;
  TimeMs exchange_timeout_ms = 2000;
  std::uint64_t field_modulus = Field::kDefaultModulus;
  std::uint64_t seed = 0;
};

/// A sensor-holding node. It announces itself until a gateway completes
/// setup, evaluates every forwarded request against its own policy, swaps
/// shares with its peers, and hands the gateway nothing but partial sums.
/// Every decision lands in the append-only transparency log.
class SourceNode final : public NetworkNode {
 public:
  SourceNode(SourceConfig config, std::shared_ptr<ReadingProvider> readings);

  const NodeId& node_id() const override { return config_.metadata.source_id; }
  void on_start(Network& net) override;
  void on_frame(Network& net, const NodeId& from,
                const std::string& frame) override;
  void on_timer(Network& net, std::uint64_t token) override;

  bool set_up() const { return set_up_; }
  const NodeId& gateway() const { return gateway_; }
  const TransparencyLog& transparency_log() const { return log_; }

 private:
  struct SessionCtx {
    SessionSpec spec;
    std::string consumer_id;
    bool shares_sent = false;
    bool partial_sent = false;
    FieldElement own_share;
    std::map<PartyId, FieldElement> received;
  };

  void dispatch(Network& net, const NodeId& from, const ProtocolMessage& m);
  void announce(Network& net);
  void handle_setup(Network& net, const NodeId& from, const ProtocolMessage& m);
  void handle_session_announce(Network& net, const ProtocolMessage& m);
  void handle_exchange_signal(Network& net, const ProtocolMessage& m);
  void handle_share(Network& net, const ProtocolMessage& m);
  void try_emit_partial(Network& net, SessionCtx& ctx);
  void veto(Network& net, const std::string& session_id,
            const std::string& reason);
  void record_decision(Network& net, const SessionSpec& spec,
                       const std::string& consumer_id, bool contributed);

  SourceConfig config_;
  Field field_;
  std::shared_ptr<ReadingProvider> readings_;
  Mt19937Random rng_;
  TransparencyLog log_;

  NodeId gateway_;
  bool set_up_ = false;
  TimeMs last_gateway_contact_ = 0;
  std::uint64_t announce_token_ = 0;
  std::uint64_t heartbeat_token_ = 0;
  std::map<std::uint64_t, std::string> deadline_tokens_;
  std::map<std::string, SessionCtx> sessions_;
};

}  // namespace smcgate
