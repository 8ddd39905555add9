#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smcgate/message.hpp"

namespace smcgate {

using TimeMs = std::int64_t;
using NodeId = std::string;

/// One transcript line. Every frame a transport handles is recorded exactly
/// once, either delivered or dropped; the transcript is the substrate for
/// the privacy and robustness checks.
struct TranscriptEntry {
  TimeMs time_ms = 0;
  NodeId from;
  NodeId to;
  std::string frame;  // no trailing newline
  bool delivered = true;
};

class Transcript {
 public:
  void record(TranscriptEntry entry) { entries_.push_back(std::move(entry)); }

  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::string serialize() const;
  static Transcript parse(std::string_view text);

  /// SHA-256 of the serialized form; equal seeds must reproduce it.
  std::string hash() const;

 private:
  std::vector<TranscriptEntry> entries_;
};

class Network;

/// A participant in the message fabric. Callbacks are serialized per
/// transport; on_start doubles as the process (re)start hook.
class NetworkNode {
 public:
  virtual ~NetworkNode() = default;

  virtual const NodeId& node_id() const = 0;
  virtual void on_start(Network& net) {}
  virtual void on_frame(Network& net, const NodeId& from,
                        const std::string& frame) = 0;
  virtual void on_timer(Network& net, std::uint64_t token) {}
};

/// Delivery substrate shared by the simulator and the socket transport.
class Network {
 public:
  virtual ~Network() = default;

  virtual void send(const NodeId& from, const NodeId& to, std::string frame) = 0;
  virtual void broadcast(const NodeId& from, std::string frame) = 0;
  virtual std::uint64_t set_timer(const NodeId& node, TimeMs delay_ms) = 0;
  virtual TimeMs now() const = 0;

  /// Connection endpoint advertised for a node (transport-specific form).
  virtual std::string endpoint_of(const NodeId& node) const = 0;
};

inline void send_message(Network& net, const NodeId& from, const NodeId& to,
                         const ProtocolMessage& m) {
  net.send(from, to, encode_message(m));
}

inline void broadcast_message(Network& net, const NodeId& from,
                              const ProtocolMessage& m) {
  net.broadcast(from, encode_message(m));
}

}  // namespace smcgate
