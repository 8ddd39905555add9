#include "smcgate/gateway_node.hpp"

#include <fstream>
#include <sstream>

#include "smcgate/auth.hpp"

namespace smcgate {

GatewayNode::GatewayNode(GatewayConfig config, AccessControlList acl,
                         std::map<std::string, std::string> consumer_keys)
    : config_(std::move(config)),
      field_(config_.field_modulus),
      acl_(std::move(acl)),
      consumer_keys_(std::move(consumer_keys)),
      directory_(config_.liveness_timeout_ms) {
  config_.codec.validate(field_);
  load_files();
}

void GatewayNode::load_files() {
  if (config_.acl_file) {
    std::ifstream in(*config_.acl_file);
    if (in) {
      std::stringstream buf;
      buf << in.rdbuf();
      AccessControlList from_file = AccessControlList::parse(buf.str());
      acl_ = std::move(from_file);
    }
  }
  if (config_.keys_file) {
    std::ifstream in(*config_.keys_file);
    if (in) {
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) continue;
        if (j.contains("consumer_id") && j.contains("key")) {
          consumer_keys_[j["consumer_id"].get<std::string>()] =
              j["key"].get<std::string>();
        }
      }
    }
  }
}

void GatewayNode::on_start(Network& net) {
  // Restart semantics: the directory and in-flight sessions are process
  // state and do not survive; sources re-announce and are set up afresh.
  directory_.clear();
  pending_setup_.clear();
  sessions_.clear();
  timer_sessions_.clear();
}

std::vector<RequestStats> GatewayNode::request_stats() const {
  std::vector<RequestStats> out;
  out.reserve(stats_.size());
  for (const auto& [key, s] : stats_) out.push_back(s);
  return out;
}

void GatewayNode::on_frame(Network& net, const NodeId& from,
                           const std::string& frame) {
  ProtocolMessage m;
  try {
    m = decode_message(frame);
  } catch (const Error&) {
    return;
  }
  try {
    dispatch(net, from, m);
  } catch (const Json::exception&) {
    // Payload with unexpected types; dropped like any malformed frame.
  }
}

void GatewayNode::dispatch(Network& net, const NodeId& from,
                           const ProtocolMessage& m) {
  switch (m.kind) {
    case MessageKind::DiscoveryAnnounce:
      handle_announcement(net, from, m);
      return;
    case MessageKind::SetupMetadata:
      if (m.payload.value("action", "") == "offer") {
        handle_setup_offer(net, from, m);
      }
      return;
    case MessageKind::Heartbeat:
      handle_heartbeat(net, from);
      return;
    case MessageKind::Request:
      handle_request(net, from, m);
      return;
    case MessageKind::Commit:
      handle_commit(net, from, m.session_id);
      return;
    case MessageKind::Veto:
      handle_veto(net, from, m);
      return;
    case MessageKind::PartialSum:
      handle_partial(net, from, m);
      return;
    case MessageKind::Abort:
      handle_failure_report(net, from, m);
      return;
    case MessageKind::DirectoryQuery:
      handle_directory_query(net, from);
      return;
    case MessageKind::ReloadControl:
      handle_reload(net, from);
      return;
    default:
      return;  // ShareTransfer and the rest are never for the gateway
  }
}

void GatewayNode::handle_announcement(Network& net, const NodeId& from,
                                      const ProtocolMessage& m) {
  const std::string source_id = m.payload.value("source_id", "");
  const std::string endpoint = m.payload.value("endpoint", "");
  if (source_id.empty() || source_id != from) return;

  switch (directory_.classify_announce(source_id, endpoint, net.now())) {
    case AnnounceAction::Reject:
      return;  // duplicate id at a different live endpoint
    case AnnounceAction::NewSource:
    case AnnounceAction::Refresh:
    case AnnounceAction::Replace: {
      pending_setup_[source_id] = endpoint;
      ProtocolMessage req;
      req.kind = MessageKind::SetupMetadata;
      req.sender = node_id();
      req.payload = {{"action", "request"}};
      send_message(net, node_id(), from, req);
      return;
    }
  }
}

void GatewayNode::handle_setup_offer(Network& net, const NodeId& from,
                                     const ProtocolMessage& m) {
  auto pending = pending_setup_.find(from);
  if (pending == pending_setup_.end()) return;  // unsolicited offer
  if (!m.payload.contains("metadata")) return;
  SourceMetadata metadata;
  try {
    metadata = SourceMetadata::from_json(m.payload.at("metadata"));
    metadata.validate();
  } catch (const Error&) {
    return;
  }
  if (metadata.source_id != from) return;

  directory_.upsert(std::move(metadata), pending->second, net.now());
  pending_setup_.erase(pending);

  ProtocolMessage ack;
  ack.kind = MessageKind::SetupMetadata;
  ack.sender = node_id();
  ack.payload = {{"action", "ack"}};
  send_message(net, node_id(), from, ack);
}

void GatewayNode::handle_heartbeat(Network& net, const NodeId& from) {
  if (!directory_.contains(from)) return;
  directory_.record_heartbeat(from, net.now());
  ProtocolMessage ack;
  ack.kind = MessageKind::Heartbeat;
  ack.sender = node_id();
  send_message(net, node_id(), from, ack);
}

void GatewayNode::handle_request(Network& net, const NodeId& from,
                                 const ProtocolMessage& m) {
  const std::string request_bytes = canonical_dump(m.payload);
  std::string request_id;
  if (m.payload.contains("request_id") && m.payload["request_id"].is_string()) {
    request_id = m.payload["request_id"].get<std::string>();
  }

  DataRequest req;
  try {
    req = DataRequest::from_json(m.payload);
  } catch (const Error&) {
    reply_error(net, from, request_id, "AuthFailed", "unparseable request");
    return;
  }

  const std::string key = session_base(from, req.request_id);
  RequestStats stats;
  stats.consumer = from;
  stats.request_id = req.request_id;
  stats.issued_at_ms = net.now();
  stats_[key] = stats;

  // Fail-closed ordering: authentication and authorization come before any
  // planning, so a rejected request never causes a frame to any source.
  auto key_it = consumer_keys_.find(req.consumer_id);
  if (req.consumer_id != from || key_it == consumer_keys_.end() ||
      !req.verify(key_it->second)) {
    finish_stats(key, net.now(), false, "AuthFailed", "bad auth tag", 0);
    reply_error(net, from, req.request_id, "AuthFailed", "bad auth tag");
    return;
  }
  if (!acl_.admits(req)) {
    finish_stats(key, net.now(), false, "AccessDenied", "no matching grant", 0);
    reply_error(net, from, req.request_id, "AccessDenied", "no matching grant");
    return;
  }

  // Plausibility: the request must make sense against the live directory.
  std::string implausible;
  if (req.window.degenerate()) {
    implausible = "degenerate time window";
  } else if (!directory_.knows_data_type(req.data_type, net.now())) {
    implausible = "unknown data type " + req.data_type;
  } else if (directory_
                 .live_matching(req.data_type, req.scope, req.aggregate,
                                net.now())
                 .empty()) {
    implausible = "scope matches no live source";
  }
  if (!implausible.empty()) {
    finish_stats(key, net.now(), false, "Implausible", implausible, 0);
    reply_error(net, from, req.request_id, "Implausible", implausible);
    return;
  }

  std::string detail;
  std::optional<SessionSpec> spec =
      plan_session(req, request_bytes, 0, net.now(), &detail);
  if (!spec) {
    finish_stats(key, net.now(), false, "InsufficientSources", detail, 0);
    reply_error(net, from, req.request_id, "InsufficientSources", detail);
    return;
  }

  Session session{*spec, SessionState(spec->participants.size()), from, req,
                  request_bytes};
  start_session(net, std::move(session));
}

std::optional<SessionSpec> GatewayNode::plan_session(
    const DataRequest& req, const std::string& request_bytes, int attempt,
    TimeMs now, std::string* error_detail) const {
  auto matches =
      directory_.live_matching(req.data_type, req.scope, req.aggregate, now);
  if (static_cast<int>(matches.size()) < config_.min_participants) {
    *error_detail = "found " + std::to_string(matches.size()) + ", required " +
                    std::to_string(config_.min_participants);
    return std::nullopt;
  }
  SessionSpec spec;
  spec.session_id = session_base(req.consumer_id, req.request_id) + "/a" +
                    std::to_string(attempt);
  for (const auto* entry : matches) {
    spec.participants.push_back({entry->metadata.source_id, entry->endpoint});
  }
  spec.data_selector = {req.data_type, req.window};
  spec.protocol_id = req.aggregate;
  spec.codec = config_.codec;
  spec.original_request = request_bytes;
  spec.min_participants = config_.min_participants;
  spec.validate();
  return spec;
}

void GatewayNode::start_session(Network& net, Session session) {
  const std::string sid = session.spec.session_id;
  if (session.state.phase() == SessionPhase::Planned) {
    session.state.advance(SessionPhase::Announced);
  }
  ProtocolMessage announce;
  announce.kind = MessageKind::Announce;
  announce.session_id = sid;
  announce.sender = node_id();
  announce.payload = {{"spec", session.spec.to_json()}};
  for (const auto& p : session.spec.participants) {
    send_message(net, node_id(), p.party_id, announce);
  }
  std::uint64_t token = net.set_timer(node_id(), config_.commit_timeout_ms);
  session.phase_timer = token;
  timer_sessions_[token] = sid;
  sessions_.insert_or_assign(sid, std::move(session));
}

void GatewayNode::handle_commit(Network& net, const NodeId& from,
                                const std::string& sid) {
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return;
  Session& session = it->second;
  if (session.state.phase() != SessionPhase::Announced) return;
  if (!session.spec.has_participant(from)) return;
  session.state.record_commit(from);
  if (session.state.all_committed()) begin_exchange(net, session);
}

void GatewayNode::begin_exchange(Network& net, Session& session) {
  session.state.advance(SessionPhase::Committed);
  ProtocolMessage go;
  go.kind = MessageKind::Commit;
  go.session_id = session.spec.session_id;
  go.sender = node_id();
  go.payload = {{"committed", static_cast<int>(session.state.commits().size())}};
  for (const auto& p : session.spec.participants) {
    send_message(net, node_id(), p.party_id, go);
  }
  session.state.advance(SessionPhase::Exchanging);
  // Twice the source-side deadline: peers report precise blame (which peer
  // stayed silent) before this backstop blames every missing partial.
  std::uint64_t token =
      net.set_timer(node_id(), 2 * config_.exchange_timeout_ms);
  session.phase_timer = token;
  timer_sessions_[token] = session.spec.session_id;
}

void GatewayNode::handle_veto(Network& net, const NodeId& from,
                              const ProtocolMessage& m) {
  auto it = sessions_.find(m.session_id);
  if (it == sessions_.end()) return;
  Session& session = it->second;
  if (session.state.phase() != SessionPhase::Announced) return;
  if (!session.spec.has_participant(from)) return;
  session.state.record_veto(from);
  // A single veto cancels the computation; the expected, structured error.
  abort_session(net, session, "Vetoed",
                std::to_string(session.state.vetoes().size()) +
                    " source(s) declined",
                {from}, "vetoed");
}

void GatewayNode::handle_partial(Network& net, const NodeId& from,
                                 const ProtocolMessage& m) {
  auto it = sessions_.find(m.session_id);
  if (it == sessions_.end()) return;
  Session& session = it->second;
  if (session.state.phase() != SessionPhase::Exchanging) return;
  if (!session.spec.has_participant(from)) return;
  FieldElement value;
  try {
    value = from_decimal(m.payload.value("partial", ""), field_);
  } catch (const Error&) {
    return;
  }
  session.state.record_partial(from, value);
  if (session.state.partials_complete()) complete_session(net, session);
}

void GatewayNode::complete_session(Network& net, Session& session) {
  session.state.advance(SessionPhase::Combining);
  AggregateResult result;
  try {
    result = gateway_combine(session.state.partials(), session.spec, field_);
  } catch (const Error& e) {
    // Decode overflow means corrupted or out-of-range inputs; a restart
    // cannot fix that.
    abort_session(net, session, "SessionFailed", e.what(), {}, "failed");
    return;
  }

  reply_result(net, session.consumer, session.request.request_id, result);
  ProtocolMessage notice;
  notice.kind = MessageKind::Result;
  notice.session_id = session.spec.session_id;
  notice.sender = node_id();
  notice.payload = {{"contributors", result.contributors},
                    {"value", result.value}};
  for (const auto& p : session.spec.participants) {
    send_message(net, node_id(), p.party_id, notice);
  }
  session.state.advance(SessionPhase::Completed);
  finish_stats(session_base(session.consumer, session.request.request_id),
               net.now(), true, "", "", session.attempt);
}

void GatewayNode::handle_failure_report(Network& net, const NodeId& from,
                                        const ProtocolMessage& m) {
  auto it = sessions_.find(m.session_id);
  if (it == sessions_.end()) return;
  Session& session = it->second;
  if (!session.spec.has_participant(from)) return;
  SessionPhase phase = session.state.phase();
  if (phase != SessionPhase::Exchanging && phase != SessionPhase::Announced) {
    return;
  }
  const std::string reason = m.payload.value("reason", "");
  std::vector<PartyId> failed;
  if (reason == "no_local_data") {
    failed.push_back(from);
  } else if (reason == "peer_timeout" && m.payload.contains("missing")) {
    for (const auto& id : m.payload.at("missing")) {
      if (id.is_string() && session.spec.has_participant(id.get<std::string>())) {
        failed.push_back(id.get<std::string>());
      }
    }
  }
  if (failed.empty()) return;
  recover_session(net, m.session_id, failed, reason);
}

void GatewayNode::on_timer(Network& net, std::uint64_t token) {
  auto timer = timer_sessions_.find(token);
  if (timer == timer_sessions_.end()) return;
  std::string sid = timer->second;
  timer_sessions_.erase(timer);

  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return;
  Session& session = it->second;
  if (session.phase_timer != token) return;  // superseded by a phase change

  std::vector<PartyId> missing;
  if (session.state.phase() == SessionPhase::Announced) {
    for (const auto& p : session.spec.participants) {
      if (!session.state.commits().count(p.party_id)) {
        missing.push_back(p.party_id);
      }
    }
    recover_session(net, sid, missing, "commit timeout");
  } else if (session.state.phase() == SessionPhase::Exchanging) {
    for (const auto& p : session.spec.participants) {
      if (!session.state.partials().count(p.party_id)) {
        missing.push_back(p.party_id);
      }
    }
    recover_session(net, sid, missing, "partial-sum timeout");
  }
}

void GatewayNode::recover_session(Network& net, const std::string& sid,
                                  const std::vector<PartyId>& failed,
                                  const std::string& cause) {
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) return;
  Session& session = it->second;

  for (const PartyId& id : failed) directory_.mark_dead(id);

  if (session.attempt >= config_.max_restarts) {
    abort_session(net, session, "SessionFailed",
                  "attempts=" + std::to_string(session.attempt) +
                      ", last_cause=" + cause,
                  {}, "failed");
    return;
  }

  std::string detail;
  std::optional<SessionSpec> spec =
      plan_session(session.request, session.request_bytes, session.attempt + 1,
                   net.now(), &detail);
  if (!spec) {
    abort_session(net, session, "SessionFailed",
                  "attempts=" + std::to_string(session.attempt) +
                      ", last_cause=" + cause + " (" + detail + ")",
                  {}, "failed");
    return;
  }

  // Tell the survivors of the aborted attempt to stand down, then restart
  // under a fresh session id with fresh randomness. Old shares are discarded;
  // the restarted session is cryptographically independent.
  ProtocolMessage stand_down;
  stand_down.kind = MessageKind::Abort;
  stand_down.session_id = sid;
  stand_down.sender = node_id();
  stand_down.payload = {{"reason", "restarting"}};
  for (const auto& p : session.spec.participants) {
    if (std::find(failed.begin(), failed.end(), p.party_id) == failed.end()) {
      send_message(net, node_id(), p.party_id, stand_down);
    }
  }

  session.state.advance(SessionPhase::Restarting);
  session.state.reset_for_restart(spec->participants.size());
  session.attempt += 1;
  session.spec = *spec;

  Session restarted = std::move(session);
  sessions_.erase(it);
  // reset_for_restart left the state in Announced; start_session must not
  // re-advance.
  const std::string new_sid = restarted.spec.session_id;
  ProtocolMessage announce;
  announce.kind = MessageKind::Announce;
  announce.session_id = new_sid;
  announce.sender = node_id();
  announce.payload = {{"spec", restarted.spec.to_json()}};
  for (const auto& p : restarted.spec.participants) {
    send_message(net, node_id(), p.party_id, announce);
  }
  std::uint64_t token = net.set_timer(node_id(), config_.commit_timeout_ms);
  restarted.phase_timer = token;
  timer_sessions_[token] = new_sid;
  sessions_.insert_or_assign(new_sid, std::move(restarted));
}

void GatewayNode::abort_session(Network& net, Session& session,
                                const std::string& code,
                                const std::string& detail,
                                const std::set<PartyId>& skip_notice,
                                const std::string& notice_reason) {
  session.state.set_abort_reason(code + ": " + detail);
  session.state.advance(SessionPhase::Aborted);
  ProtocolMessage notice;
  notice.kind = MessageKind::Abort;
  notice.session_id = session.spec.session_id;
  notice.sender = node_id();
  notice.payload = {{"reason", notice_reason}};
  for (const auto& p : session.spec.participants) {
    if (!skip_notice.count(p.party_id)) {
      send_message(net, node_id(), p.party_id, notice);
    }
  }
  reply_error(net, session.consumer, session.request.request_id, code, detail);
  finish_stats(session_base(session.consumer, session.request.request_id),
               net.now(), false, code, detail, session.attempt);
}

void GatewayNode::reply_error(Network& net, const NodeId& consumer,
                              const std::string& request_id,
                              const std::string& code,
                              const std::string& detail) {
  ProtocolMessage m;
  m.kind = MessageKind::Result;
  m.sender = node_id();
  m.payload = {{"code", code},
               {"detail", detail},
               {"outcome", "error"},
               {"request_id", request_id}};
  send_message(net, node_id(), consumer, m);
}

void GatewayNode::reply_result(Network& net, const NodeId& consumer,
                               const std::string& request_id,
                               const AggregateResult& r) {
  ProtocolMessage m;
  m.kind = MessageKind::Result;
  m.sender = node_id();
  m.payload = {{"contributors", r.contributors},
               {"outcome", "ok"},
               {"request_id", request_id},
               {"value", r.value}};
  send_message(net, node_id(), consumer, m);
}

void GatewayNode::finish_stats(const std::string& key, TimeMs now, bool ok,
                               const std::string& code,
                               const std::string& detail, int restarts) {
  auto it = stats_.find(key);
  if (it == stats_.end()) return;
  it->second.completed_at_ms = now;
  it->second.ok = ok;
  it->second.error_code = code;
  it->second.detail = detail;
  it->second.restarts = restarts;
}

void GatewayNode::handle_directory_query(Network& net, const NodeId& from) {
  ProtocolMessage m;
  m.kind = MessageKind::DirectoryListing;
  m.sender = node_id();
  m.payload = directory_.listing(net.now());
  send_message(net, node_id(), from, m);
}

void GatewayNode::handle_reload(Network& net, const NodeId& from) {
  load_files();
  ProtocolMessage m;
  m.kind = MessageKind::Result;
  m.sender = node_id();
  m.payload = {{"outcome", "ok"}, {"reloaded", true}};
  send_message(net, node_id(), from, m);
}

}  // namespace smcgate
