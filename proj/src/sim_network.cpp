#include "smcgate/sim_network.hpp"

namespace smcgate {

bool MessageMatch::matches(const std::string& frame_kind, const NodeId& from,
                           const NodeId& to) const {
  if (kind && *kind != frame_kind) return false;
  if (sender && *sender != from) return false;
  if (receiver && *receiver != to) return false;
  return true;
}

SimNetwork::SimNetwork(std::uint64_t seed, TimeMs latency_ms, TimeMs jitter_ms)
    : jitter_rng_(derive_seed(seed, "transport")),
      latency_ms_(latency_ms),
      jitter_ms_(jitter_ms) {
  if (latency_ms < 0 || jitter_ms < 0) {
    throw Error(ErrorCode::ConfigError, "latency must be non-negative");
  }
}

void SimNetwork::register_node(NetworkNode* node) {
  const NodeId& id = node->node_id();
  if (nodes_.count(id)) {
    throw Error(ErrorCode::ConfigError, "duplicate node id: " + id);
  }
  nodes_[id] = node;
  registration_order_.push_back(id);
}

void SimNetwork::schedule_fault(Fault fault) {
  Event ev;
  ev.time = fault.at_ms;
  ev.kind = Event::Kind::Fault;
  ev.fault = std::move(fault);
  push(std::move(ev));
}

void SimNetwork::start() {
  for (const NodeId& id : registration_order_) {
    nodes_.at(id)->on_start(*this);
  }
}

void SimNetwork::push(Event ev) {
  ev.seq = next_seq_++;
  queue_.push(std::move(ev));
}

std::string SimNetwork::frame_kind(const std::string& frame) const {
  try {
    return to_string(decode_message(frame).kind);
  } catch (const Error&) {
    return "";
  }
}

bool SimNetwork::partitioned(const NodeId& a, const NodeId& b) const {
  if (!partition_) return false;
  return partition_->count(a) != partition_->count(b);
}

void SimNetwork::send(const NodeId& from, const NodeId& to, std::string frame) {
  if (!frame.empty() && frame.back() == '\n') frame.pop_back();
  if (!nodes_.count(to)) {
    throw Error(ErrorCode::UnknownNode, to);
  }
  std::string kind = frame_kind(frame);
  // Lose rules and partitions apply at send time; a dead receiver is judged
  // at delivery time so a revival mid-flight still receives the frame.
  for (const auto& rule : lose_rules_) {
    if (rule.matches(kind, from, to)) {
      transcript_.record({now_, from, to, frame, false});
      return;
    }
  }
  if (partitioned(from, to)) {
    transcript_.record({now_, from, to, frame, false});
    return;
  }
  TimeMs latency = latency_ms_;
  if (jitter_ms_ > 0) {
    latency += static_cast<TimeMs>(
        jitter_rng_.uniform(static_cast<std::uint64_t>(jitter_ms_) + 1));
  }
  for (const auto& [rule, extra] : delay_rules_) {
    if (rule.matches(kind, from, to)) latency += extra;
  }
  Event ev;
  ev.time = now_ + latency;
  ev.kind = Event::Kind::Deliver;
  ev.from = from;
  ev.to = to;
  ev.frame = std::move(frame);
  push(std::move(ev));
}

void SimNetwork::broadcast(const NodeId& from, std::string frame) {
  if (!frame.empty() && frame.back() == '\n') frame.pop_back();
  for (const NodeId& id : registration_order_) {
    if (id == from) continue;
    send(from, id, frame);
  }
}

std::uint64_t SimNetwork::set_timer(const NodeId& node, TimeMs delay_ms) {
  if (!nodes_.count(node)) {
    throw Error(ErrorCode::UnknownNode, node);
  }
  Event ev;
  ev.time = now_ + (delay_ms < 0 ? 0 : delay_ms);
  ev.kind = Event::Kind::Timer;
  ev.to = node;
  ev.token = next_token_++;
  std::uint64_t token = ev.token;
  push(std::move(ev));
  return token;
}

void SimNetwork::advance_time(TimeMs until) {
  if (until < now_) {
    throw Error(ErrorCode::ConfigError, "virtual time cannot move backwards");
  }
  while (!queue_.empty() && queue_.top().time <= until) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    execute(ev);
  }
  now_ = until;
}

void SimNetwork::execute(Event& ev) {
  switch (ev.kind) {
    case Event::Kind::Deliver: {
      if (dead_.count(ev.to) || dead_.count(ev.from)) {
        transcript_.record({now_, ev.from, ev.to, ev.frame, false});
        return;
      }
      transcript_.record({now_, ev.from, ev.to, ev.frame, true});
      nodes_.at(ev.to)->on_frame(*this, ev.from, ev.frame);
      return;
    }
    case Event::Kind::Timer: {
      if (dead_.count(ev.to)) return;
      nodes_.at(ev.to)->on_timer(*this, ev.token);
      return;
    }
    case Event::Kind::Fault:
      apply_fault(ev.fault);
      return;
  }
}

void SimNetwork::apply_fault(const Fault& fault) {
  switch (fault.kind) {
    case Fault::Kind::DropNode:
      dead_.insert(fault.node);
      return;
    case Fault::Kind::ReviveNode:
      if (dead_.erase(fault.node) > 0) {
        // A revived node restarts from scratch.
        nodes_.at(fault.node)->on_start(*this);
      }
      return;
    case Fault::Kind::Partition:
      partition_ = fault.group;
      return;
    case Fault::Kind::Heal:
      partition_.reset();
      return;
    case Fault::Kind::LoseMessage:
      lose_rules_.push_back(fault.match);
      return;
    case Fault::Kind::Delay:
      delay_rules_.emplace_back(fault.match, fault.extra_ms);
      return;
  }
}

}  // namespace smcgate
