#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smcgate/metadata.hpp"
#include "smcgate/protocol.hpp"
#include "smcgate/request.hpp"
#include "smcgate/transport.hpp"

namespace smcgate {

struct GatewayConfig {
  NodeId id = "gateway";
  int min_participants = 3;
  TimeMs heartbeat_interval_ms = 1000;
  TimeMs liveness_timeout_ms = 3000;
  TimeMs commit_timeout_ms = 2000;
  TimeMs exchange_timeout_ms = 2000;
  int max_restarts = 2;
  std::uint64_t field_modulus = Field::kDefaultModulus;
  FixedPointCodec codec;
  std::optional<std::string> acl_file;
  std::optional<std::string> keys_file;
};

/// Operator-facing record of one consumer request, including the restart
/// count the consumer never sees.
struct RequestStats {
  std::string consumer;
  std::string request_id;
  TimeMs issued_at_ms = 0;
  TimeMs completed_at_ms = -1;
  int restarts = 0;
  bool ok = false;
  std::string error_code;
  std::string detail;
};

/// The replacement middleware: keeps the metadata directory, authenticates
/// and authorizes consumer requests, plans and drives SMC sessions, restarts
/// them on failure, and forwards only aggregate results. It never holds a
/// share and is not a computation party.
class GatewayNode final : public NetworkNode {
 public:
  GatewayNode(GatewayConfig config, AccessControlList acl,
              std::map<std::string, std::string> consumer_keys);

  const NodeId& node_id() const override { return config_.id; }
  void on_start(Network& net) override;
  void on_frame(Network& net, const NodeId& from,
                const std::string& frame) override;
  void on_timer(Network& net, std::uint64_t token) override;

  const MetadataDirectory& directory() const { return directory_; }
  std::vector<RequestStats> request_stats() const;

 private:
  struct Session {
    SessionSpec spec;
    SessionState state;
    NodeId consumer;
    DataRequest request;
    std::string request_bytes;
    int attempt = 0;  // restarts used so far
    std::uint64_t phase_timer = 0;
  };

  void dispatch(Network& net, const NodeId& from, const ProtocolMessage& m);
  void handle_announcement(Network& net, const NodeId& from,
                           const ProtocolMessage& m);
  void handle_setup_offer(Network& net, const NodeId& from,
                          const ProtocolMessage& m);
  void handle_heartbeat(Network& net, const NodeId& from);
  void handle_request(Network& net, const NodeId& from,
                      const ProtocolMessage& m);
  void handle_commit(Network& net, const NodeId& from, const std::string& sid);
  void handle_veto(Network& net, const NodeId& from, const ProtocolMessage& m);
  void handle_partial(Network& net, const NodeId& from,
                      const ProtocolMessage& m);
  void handle_failure_report(Network& net, const NodeId& from,
                             const ProtocolMessage& m);
  void handle_directory_query(Network& net, const NodeId& from);
  void handle_reload(Network& net, const NodeId& from);

  /// Builds the session spec for an admissible request; participants are the
  /// live directory matches. Returns nullopt with the InsufficientSources
  /// detail filled in when fewer than min_participants match.
  std::optional<SessionSpec> plan_session(const DataRequest& req,
                                          const std::string& request_bytes,
                                          int attempt, TimeMs now,
                                          std::string* error_detail) const;

  void start_session(Network& net, Session session);
  void begin_exchange(Network& net, Session& session);
  void complete_session(Network& net, Session& session);
  void recover_session(Network& net, const std::string& sid,
                       const std::vector<PartyId>& failed,
                       const std::string& cause);
  void abort_session(Network& net, Session& session, const std::string& code,
                     const std::string& detail,
                     const std::set<PartyId>& skip_notice,
                     const std::string& notice_reason);
  void reply_error(Network& net, const NodeId& consumer,
                   const std::string& request_id, const std::string& code,
                   const std::string& detail);
  void reply_result(Network& net, const NodeId& consumer,
                    const std::string& request_id, const AggregateResult& r);
  void finish_stats(const std::string& key, TimeMs now, bool ok,
                    const std::string& code, const std::string& detail,
                    int restarts);
  void load_files();

  std::string session_base(const NodeId& consumer,
                           const std::string& request_id) const {
    return consumer + "/" + request_id;
  }

  GatewayConfig config_;
  Field field_;
  AccessControlList acl_;
  std::map<std::string, std::string> consumer_keys_;
  MetadataDirectory directory_;
  std::map<NodeId, std::string> pending_setup_;  // source -> announced endpoint
  std::map<std::string, Session> sessions_;      // by session id
  std::map<std::uint64_t, std::string> timer_sessions_;
  std::map<std::string, RequestStats> stats_;    // by consumer/request_id
};

}  // namespace smcgate
