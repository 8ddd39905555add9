#pragma once

#include <map>
#include <vector>

#include "smcgate/request.hpp"
#include "smcgate/transport.hpp"

namespace smcgate {

struct ScriptedRequest {
  TimeMs issue_at_ms = 0;
  DataRequest request;      // auth_tag filled in at issue time
  bool corrupt_auth = false;
};

struct ConsumerOutcome {
  std::string request_id;
  bool responded = false;
  bool ok = false;
  double value = 0.0;
  int contributors = 0;
  std::string code;
  std::string detail;
  TimeMs issued_at_ms = -1;
  TimeMs completed_at_ms = -1;
};

struct ConsumerConfig {
  NodeId id;
  std::string key;
  NodeId gateway_id = "gateway";
  std::vector<ScriptedRequest> requests;
};

/// A thin consumer: issues scripted requests at their scheduled times and
/// records what comes back. It sees results and structured errors, never
/// session mechanics.
class ConsumerNode final : public NetworkNode {
 public:
  explicit ConsumerNode(ConsumerConfig config) : config_(std::move(config)) {}

  const NodeId& node_id() const override { return config_.id; }
  void on_start(Network& net) override;
  void on_frame(Network& net, const NodeId& from,
                const std::string& frame) override;
  void on_timer(Network& net, std::uint64_t token) override;

  const std::vector<ConsumerOutcome>& outcomes() const { return outcomes_; }
  bool all_responded() const;

 private:
  ConsumerConfig config_;
  std::map<std::uint64_t, std::size_t> timer_requests_;  // token -> index
  std::vector<ConsumerOutcome> outcomes_;
};

}  // namespace smcgate
