#pragma once

#include <map>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "smcgate/rng.hpp"
#include "smcgate/transport.hpp"

namespace smcgate {

/// Frame predicate for lose/delay fault rules. Unset fields match anything;
/// kind is matched against the frame's decoded kind name.
struct MessageMatch {
  std::optional<std::string> kind;
  std::optional<NodeId> sender;
  std::optional<NodeId> receiver;

  bool matches(const std::string& frame_kind, const NodeId& from,
               const NodeId& to) const;
};

struct Fault {
  enum class Kind { DropNode, ReviveNode, Partition, Heal, LoseMessage, Delay };

  TimeMs at_ms = 0;
  Kind kind = Kind::DropNode;
  NodeId node;                 // DropNode / ReviveNode
  std::set<NodeId> group;      // Partition: this set is cut off from the rest
  MessageMatch match;          // LoseMessage / Delay
  TimeMs extra_ms = 0;         // Delay
};

/// Deterministic discrete-event network. Events execute in (virtual time,
/// sequence) order, all randomness is seeded, so one (seed, scenario) pair
/// always yields byte-identical transcripts.
class SimNetwork final : public Network {
 public:
  explicit SimNetwork(std::uint64_t seed, TimeMs latency_ms = 10,
                      TimeMs jitter_ms = 0);

  void register_node(NetworkNode* node);
  void schedule_fault(Fault fault);

  /// Invokes on_start for every registered node, in registration order.
  void start();

  /// Executes all events with time <= until, in order. Virtual time is
  /// monotone; it ends at `until` even when the queue drains early.
  void advance_time(TimeMs until);

  bool node_alive(const NodeId& id) const { return !dead_.count(id); }
  const Transcript& transcript() const { return transcript_; }

  // Network interface.
  void send(const NodeId& from, const NodeId& to, std::string frame) override;
  void broadcast(const NodeId& from, std::string frame) override;
  std::uint64_t set_timer(const NodeId& node, TimeMs delay_ms) override;
  TimeMs now() const override { return now_; }
  std::string endpoint_of(const NodeId& node) const override {
    return "sim://" + node;
  }

 private:
  struct Event {
    TimeMs time;
    std::uint64_t seq;
    enum class Kind { Deliver, Timer, Fault } kind;
    NodeId from, to;
    std::string frame;
    std::uint64_t token = 0;
    Fault fault;
  };
  struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  void push(Event ev);
  void route(const NodeId& from, const NodeId& to, const std::string& frame);
  void execute(Event& ev);
  void apply_fault(const Fault& fault);
  bool partitioned(const NodeId& a, const NodeId& b) const;
  std::string frame_kind(const std::string& frame) const;

  std::map<NodeId, NetworkNode*> nodes_;
  std::vector<NodeId> registration_order_;
  std::set<NodeId> dead_;
  std::optional<std::set<NodeId>> partition_;  // group cut off from the rest
  std::vector<std::pair<MessageMatch, TimeMs>> delay_rules_;
  std::vector<MessageMatch> lose_rules_;

  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  Transcript transcript_;
  Mt19937Random jitter_rng_;
  TimeMs now_ = 0;
  TimeMs latency_ms_;
  TimeMs jitter_ms_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_token_ = 1;
};

}  // namespace smcgate
