#include "smcgate/consumer_node.hpp"

namespace smcgate {

void ConsumerNode::on_start(Network& net) {
  timer_requests_.clear();
  outcomes_.assign(config_.requests.size(), {});
  for (std::size_t i = 0; i < config_.requests.size(); ++i) {
    outcomes_[i].request_id = config_.requests[i].request.request_id;
    timer_requests_[net.set_timer(node_id(), config_.requests[i].issue_at_ms)] = i;
  }
}

void ConsumerNode::on_timer(Network& net, std::uint64_t token) {
  auto it = timer_requests_.find(token);
  if (it == timer_requests_.end()) return;
  std::size_t index = it->second;
  timer_requests_.erase(it);

  DataRequest req = config_.requests[index].request;
  req.consumer_id = node_id();
  req.sign(config_.key);
  if (config_.requests[index].corrupt_auth) {
    // One hex digit flipped: the canonical bytes change, the tag lies.
    req.auth_tag[0] = req.auth_tag[0] == '0' ? '1' : '0';
  }

  ProtocolMessage m;
  m.kind = MessageKind::Request;
  m.sender = node_id();
  m.payload = req.to_json();
  send_message(net, node_id(), config_.gateway_id, m);
  outcomes_[index].issued_at_ms = net.now();
}

void ConsumerNode::on_frame(Network& net, const NodeId& from,
                            const std::string& frame) {
  ProtocolMessage m;
  try {
    m = decode_message(frame);
  } catch (const Error&) {
    return;
  }
  if (m.kind != MessageKind::Result || from != config_.gateway_id) return;
  try {
    const std::string request_id = m.payload.value("request_id", "");
    for (auto& outcome : outcomes_) {
      if (outcome.request_id != request_id || outcome.responded) continue;
      outcome.responded = true;
      outcome.completed_at_ms = net.now();
      if (m.payload.value("outcome", "") == "ok") {
        outcome.ok = true;
        outcome.value = m.payload.value("value", 0.0);
        outcome.contributors = m.payload.value("contributors", 0);
      } else {
        outcome.code = m.payload.value("code", "");
        outcome.detail = m.payload.value("detail", "");
      }
      break;
    }
  } catch (const Json::exception&) {
  }
}

bool ConsumerNode::all_responded() const {
  for (const auto& o : outcomes_) {
    if (!o.responded) return false;
  }
  return true;
}

}  // namespace smcgate
