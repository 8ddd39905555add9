#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "smcgate/transport.hpp"

namespace smcgate {

/// Loopback TCP transport. Every node gets a listening socket on 127.0.0.1;
/// one reader thread per accepted connection feeds whole frames into a
/// single dispatch queue, and one dispatcher thread drives all node
/// callbacks, so node code sees the same serialized world as in the
/// simulator. No fault injection; time is wall-clock milliseconds since
/// start().
class SocketNetwork final : public Network {
 public:
  SocketNetwork();
  ~SocketNetwork() override;

  void register_node(NetworkNode* node);

  /// Binds listeners, starts the dispatcher, and runs on_start for every
  /// node in registration order.
  void start();

  /// Runs until the predicate holds (evaluated with callbacks quiesced) or
  /// the wall-clock deadline passes. Returns true when the predicate held.
  bool run_until(std::function<bool()> predicate, TimeMs max_wall_ms);

  void stop();

  const Transcript& transcript() const { return transcript_; }

  // Network interface; callable from dispatcher callbacks and on_start.
  void send(const NodeId& from, const NodeId& to, std::string frame) override;
  void broadcast(const NodeId& from, std::string frame) override;
  std::uint64_t set_timer(const NodeId& node, TimeMs delay_ms) override;
  TimeMs now() const override;
  std::string endpoint_of(const NodeId& node) const override;

 private:
  struct Incoming {
    NodeId to;
    std::string frame;
  };
  struct PendingTimer {
    std::chrono::steady_clock::time_point due;
    std::uint64_t token;
    NodeId node;
  };

  void listener_loop(NodeId node, int listen_fd);
  void reader_loop(NodeId node, int conn_fd);
  void dispatch_loop();
  int connect_to_locked(const NodeId& to);

  std::map<NodeId, NetworkNode*> nodes_;
  std::vector<NodeId> registration_order_;
  std::map<NodeId, int> listen_fds_;
  std::map<NodeId, int> listen_ports_;
  std::map<NodeId, int> out_fds_;
  std::mutex out_mutex_;

  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<Incoming> incoming_;
  std::vector<PendingTimer> timers_;

  // Held while any node callback runs; run_until takes it to inspect state.
  std::mutex dispatch_mutex_;

  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> next_token_{1};

  std::vector<std::thread> core_threads_;
  std::mutex reader_mutex_;
  std::vector<std::thread> reader_threads_;

  mutable std::mutex transcript_mutex_;
  Transcript transcript_;
  std::chrono::steady_clock::time_point epoch_;
};

}  // namespace smcgate
