#include "smcgate/source_node.hpp"

#include <algorithm>
#include <fstream>

#include "smcgate/request.hpp"

namespace smcgate {

std::shared_ptr<ScriptedReadings> ScriptedReadings::from_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open readings file " + path);
  }
  std::vector<Reading> readings;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::ConfigError, "bad reading record: " + line);
    }
    readings.push_back({j.at("data_type").get<std::string>(),
                        j.at("time_ms").get<TimeMs>(),
                        j.at("value").get<double>()});
  }
  return std::make_shared<ScriptedReadings>(std::move(readings));
}

std::optional<double> ScriptedReadings::reading_for(
    const DataSelector& selector) {
  std::optional<double> best;
  TimeMs best_time = 0;
  for (const Reading& r : readings_) {
    if (r.data_type != selector.data_type) continue;
    if (!selector.window.contains(r.time_ms)) continue;
    if (!best || r.time_ms >= best_time) {
      best = r.value;
      best_time = r.time_ms;
    }
  }
  return best;
}

SourceNode::SourceNode(SourceConfig config,
                       std::shared_ptr<ReadingProvider> readings)
    : config_(std::move(config)),
      field_(config_.field_modulus),
      readings_(std::move(readings)),
      rng_(derive_seed(config_.seed, config_.metadata.source_id)) {
  config_.metadata.validate();
}

void SourceNode::on_start(Network& net) {
  // A (re)started source has no gateway and no session state; the
  // transparency log survives, it models persistent storage.
  gateway_.clear();
  set_up_ = false;
  sessions_.clear();
  deadline_tokens_.clear();
  heartbeat_token_ = 0;
  announce(net);
  announce_token_ = net.set_timer(node_id(), config_.announce_interval_ms);
}

void SourceNode::announce(Network& net) {
  ProtocolMessage m;
  m.kind = MessageKind::DiscoveryAnnounce;
  m.sender = node_id();
  m.payload = {{"endpoint", net.endpoint_of(node_id())},
               {"source_id", node_id()}};
  broadcast_message(net, node_id(), m);
}

void SourceNode::on_timer(Network& net, std::uint64_t token) {
  if (token == announce_token_) {
    if (set_up_ &&
        net.now() - last_gateway_contact_ > config_.liveness_timeout_ms) {
      // Gateway went silent; fall back to discovery.
      set_up_ = false;
      gateway_.clear();
    }
    if (!set_up_) announce(net);
    announce_token_ = net.set_timer(node_id(), config_.announce_interval_ms);
    return;
  }
  if (token == heartbeat_token_) {
    if (set_up_) {
      if (net.now() - last_gateway_contact_ > config_.liveness_timeout_ms) {
        set_up_ = false;
        gateway_.clear();
        return;
      }
      ProtocolMessage hb;
      hb.kind = MessageKind::Heartbeat;
      hb.sender = node_id();
      send_message(net, node_id(), gateway_, hb);
      heartbeat_token_ = net.set_timer(node_id(), config_.heartbeat_interval_ms);
    }
    return;
  }
  auto deadline = deadline_tokens_.find(token);
  if (deadline != deadline_tokens_.end()) {
    std::string sid = deadline->second;
    deadline_tokens_.erase(deadline);
    auto it = sessions_.find(sid);
    if (it == sessions_.end() || it->second.partial_sent) return;
    // Exchange deadline passed with peers still silent.
    SessionCtx& ctx = it->second;
    Json missing = Json::array();
    for (const auto& p : ctx.spec.participants) {
      if (p.party_id == node_id()) continue;
      if (!ctx.received.count(p.party_id)) missing.push_back(p.party_id);
    }
    ProtocolMessage report;
    report.kind = MessageKind::Abort;
    report.session_id = sid;
    report.sender = node_id();
    report.payload = {{"missing", missing}, {"reason", "peer_timeout"}};
    send_message(net, node_id(), gateway_, report);
  }
}

void SourceNode::on_frame(Network& net, const NodeId& from,
                          const std::string& frame) {
  ProtocolMessage m;
  try {
    m = decode_message(frame);
  } catch (const Error&) {
    return;  // unparseable frames are dropped
  }
  if (set_up_ && from == gateway_) last_gateway_contact_ = net.now();
  try {
    dispatch(net, from, m);
  } catch (const Json::exception&) {
  }
}

void SourceNode::dispatch(Network& net, const NodeId& from,
                          const ProtocolMessage& m) {
  switch (m.kind) {
    case MessageKind::SetupMetadata:
      handle_setup(net, from, m);
      return;
    case MessageKind::Heartbeat:
      return;  // gateway ack; contact time already refreshed
    case MessageKind::Announce:
      if (set_up_ && from == gateway_) handle_session_announce(net, m);
      return;
    case MessageKind::Commit:
      if (set_up_ && from == gateway_) handle_exchange_signal(net, m);
      return;
    case MessageKind::ShareTransfer:
      handle_share(net, m);
      return;
    case MessageKind::Result: {
      if (from != gateway_) return;
      if (log_.has_record(m.session_id)) {
        log_.mark_delivered(m.session_id, net.now());
      }
      sessions_.erase(m.session_id);
      return;
    }
    case MessageKind::Abort:
      if (from == gateway_) sessions_.erase(m.session_id);
      return;
    default:
      return;  // not addressed to sources
  }
}

void SourceNode::handle_setup(Network& net, const NodeId& from,
                              const ProtocolMessage& m) {
  const std::string action = m.payload.value("action", "");
  if (action == "request") {
    ProtocolMessage offer;
    offer.kind = MessageKind::SetupMetadata;
    offer.sender = node_id();
    offer.payload = {{"action", "offer"},
                     {"metadata", config_.metadata.to_json()}};
    send_message(net, node_id(), from, offer);
    return;
  }
  if (action == "ack") {
    bool rearm = !set_up_;
    gateway_ = from;
    set_up_ = true;
    last_gateway_contact_ = net.now();
    if (rearm) {
      heartbeat_token_ = net.set_timer(node_id(), config_.heartbeat_interval_ms);
    }
  }
}

void SourceNode::record_decision(Network& net, const SessionSpec& spec,
                                 const std::string& consumer_id,
                                 bool contributed) {
  TransparencyRecord record;
  record.timestamp_ms = net.now();
  record.session_id = spec.session_id;
  record.original_request = spec.original_request;
  record.consumer_id = consumer_id;
  record.contributed = contributed;
  log_.append(std::move(record));
}

void SourceNode::veto(Network& net, const std::string& session_id,
                      const std::string& reason) {
  ProtocolMessage m;
  m.kind = MessageKind::Veto;
  m.session_id = session_id;
  m.sender = node_id();
  m.payload = {{"reason", reason}};
  send_message(net, node_id(), gateway_, m);
}

void SourceNode::handle_session_announce(Network& net,
                                         const ProtocolMessage& m) {
  if (!m.payload.contains("spec")) return;
  SessionSpec spec;
  try {
    spec = SessionSpec::from_json(m.payload.at("spec"));
  } catch (const Error&) {
    return;
  }
  if (spec.session_id != m.session_id || !spec.has_participant(node_id())) {
    return;
  }
  if (sessions_.count(spec.session_id) || log_.has_record(spec.session_id)) {
    return;  // duplicate announce
  }

  DataRequest request;
  try {
    request = DataRequest::parse(spec.original_request);
  } catch (const Error&) {
    // Cannot attribute a consumer; still record the refusal.
    record_decision(net, spec, "", false);
    veto(net, spec.session_id, "malformed_request");
    return;
  }

  // The forwarded bytes must describe the session they arrived with.
  if (request.data_type != spec.data_selector.data_type ||
      request.aggregate != spec.protocol_id ||
      !(request.window == spec.data_selector.window)) {
    record_decision(net, spec, request.consumer_id, false);
    veto(net, spec.session_id, "request_mismatch");
    return;
  }

  PolicyDecision decision = evaluate_policy(
      config_.policy, request.consumer_id, request.purpose, request.data_type);
  if (!decision.commit) {
    record_decision(net, spec, request.consumer_id, false);
    veto(net, spec.session_id, decision.reason);
    return;
  }

  if (!readings_->reading_for(spec.data_selector)) {
    record_decision(net, spec, request.consumer_id, false);
    veto(net, spec.session_id, "no_local_data");
    return;
  }

  record_decision(net, spec, request.consumer_id, true);
  SessionCtx ctx;
  ctx.spec = spec;
  ctx.consumer_id = request.consumer_id;
  sessions_.emplace(spec.session_id, std::move(ctx));

  ProtocolMessage commit;
  commit.kind = MessageKind::Commit;
  commit.session_id = spec.session_id;
  commit.sender = node_id();
  send_message(net, node_id(), gateway_, commit);
}

void SourceNode::handle_exchange_signal(Network& net,
                                        const ProtocolMessage& m) {
  auto it = sessions_.find(m.session_id);
  if (it == sessions_.end() || it->second.shares_sent) return;
  SessionCtx& ctx = it->second;

  std::optional<double> reading = readings_->reading_for(ctx.spec.data_selector);
  if (!reading) {
    // Readings vanished between commit and exchange; report instead of
    // stalling the session.
    ProtocolMessage report;
    report.kind = MessageKind::Abort;
    report.session_id = m.session_id;
    report.sender = node_id();
    report.payload = {{"reason", "no_local_data"}};
    send_message(net, node_id(), gateway_, report);
    sessions_.erase(it);
    return;
  }

  FieldElement value = encode_fixed(*reading, ctx.spec.codec, field_);
  std::map<PartyId, FieldElement> shares =
      source_prepare_shares(value, ctx.spec, node_id(), rng_, field_);
  ctx.own_share = shares.at(node_id());
  for (const auto& p : ctx.spec.participants) {
    if (p.party_id == node_id()) continue;
    ProtocolMessage transfer;
    transfer.kind = MessageKind::ShareTransfer;
    transfer.session_id = m.session_id;
    transfer.sender = node_id();
    transfer.payload = {{"share", to_decimal(shares.at(p.party_id))}};
    send_message(net, node_id(), p.party_id, transfer);
  }
  ctx.shares_sent = true;
  deadline_tokens_[net.set_timer(node_id(), config_.exchange_timeout_ms)] =
      m.session_id;
  try_emit_partial(net, ctx);
}

void SourceNode::handle_share(Network& net, const ProtocolMessage& m) {
  auto it = sessions_.find(m.session_id);
  if (it == sessions_.end()) return;
  SessionCtx& ctx = it->second;
  if (m.sender == node_id() || !ctx.spec.has_participant(m.sender)) return;
  if (ctx.received.count(m.sender)) return;
  FieldElement share;
  try {
    share = from_decimal(m.payload.value("share", ""), field_);
  } catch (const Error&) {
    return;
  }
  ctx.received.emplace(m.sender, share);
  if (ctx.shares_sent) try_emit_partial(net, ctx);
}

void SourceNode::try_emit_partial(Network& net, SessionCtx& ctx) {
  std::size_t peers = ctx.spec.participants.size() - 1;
  if (ctx.partial_sent || ctx.received.size() != peers) return;
  std::vector<FieldElement> received;
  received.reserve(peers);
  for (const auto& [party, share] : ctx.received) received.push_back(share);
  FieldElement partial =
      source_accumulate(ctx.own_share, received, peers, field_);
  ProtocolMessage m;
  m.kind = MessageKind::PartialSum;
  m.session_id = ctx.spec.session_id;
  m.sender = node_id();
  m.payload = {{"partial", to_decimal(partial)}};
  send_message(net, node_id(), gateway_, m);
  ctx.partial_sent = true;
}

}  // namespace smcgate
