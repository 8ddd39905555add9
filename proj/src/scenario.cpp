#include "smcgate/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace smcgate {

const char* to_string(TransportKind kind) {
  return kind == TransportKind::Sim ? "sim" : "socket";
}

TransportKind transport_from_string(std::string_view name) {
  if (name == "sim") return TransportKind::Sim;
  if (name == "socket") return TransportKind::Socket;
  throw Error(ErrorCode::ConfigError, "unknown transport " + std::string(name));
}

namespace {

const char* fault_kind_name(Fault::Kind kind) {
  switch (kind) {
    case Fault::Kind::DropNode: return "drop_node";
    case Fault::Kind::ReviveNode: return "revive_node";
    case Fault::Kind::Partition: return "partition";
    case Fault::Kind::Heal: return "heal";
    case Fault::Kind::LoseMessage: return "lose_message";
    case Fault::Kind::Delay: return "delay";
  }
  return "drop_node";
}

Fault::Kind fault_kind_from(const std::string& name) {
  if (name == "drop_node") return Fault::Kind::DropNode;
  if (name == "revive_node") return Fault::Kind::ReviveNode;
  if (name == "partition") return Fault::Kind::Partition;
  if (name == "heal") return Fault::Kind::Heal;
  if (name == "lose_message") return Fault::Kind::LoseMessage;
  if (name == "delay") return Fault::Kind::Delay;
  throw Error(ErrorCode::ConfigError, "unknown fault kind " + name);
}

Json match_to_json(const MessageMatch& m) {
  Json j = Json::object();
  if (m.kind) j["kind"] = *m.kind;
  if (m.sender) j["sender"] = *m.sender;
  if (m.receiver) j["receiver"] = *m.receiver;
  return j;
}

MessageMatch match_from_json(const Json& j) {
  MessageMatch m;
  if (j.contains("kind")) m.kind = j.at("kind").get<std::string>();
  if (j.contains("sender")) m.sender = j.at("sender").get<std::string>();
  if (j.contains("receiver")) m.receiver = j.at("receiver").get<std::string>();
  return m;
}

Json policy_to_json(const SourcePolicy& p) {
  Json rules = Json::array();
  for (const auto& r : p.rules) {
    rules.push_back({{"consumer", r.consumer},
                     {"data_type", r.data_type},
                     {"decision", r.allow ? "allow" : "deny"},
                     {"purpose", r.purpose}});
  }
  return Json{{"default", p.default_allow ? "allow" : "deny"},
              {"rules", rules}};
}

SourcePolicy policy_from_json(const Json& j) {
  SourcePolicy p;
  p.default_allow = j.at("default").get<std::string>() == "allow";
  for (const auto& r : j.at("rules")) {
    p.rules.push_back({r.at("consumer").get<std::string>(),
                       r.at("purpose").get<std::string>(),
                       r.at("data_type").get<std::string>(),
                       r.at("decision").get<std::string>() == "allow"});
  }
  return p;
}

}  // namespace

void Scenario::validate() const {
  std::set<std::string> node_ids{gateway_id};
  std::set<std::string> consumer_ids;
  for (const auto& s : sources) {
    s.metadata.validate();
    if (!node_ids.insert(s.metadata.source_id).second) {
      throw Error(ErrorCode::ConfigError,
                  "duplicate node id " + s.metadata.source_id);
    }
  }
  for (const auto& c : consumers) {
    if (!node_ids.insert(c.id).second) {
      throw Error(ErrorCode::ConfigError, "duplicate node id " + c.id);
    }
    consumer_ids.insert(c.id);
    std::set<std::string> request_ids;
    for (const auto& r : c.requests) {
      if (!request_ids.insert(r.request.request_id).second) {
        throw Error(ErrorCode::ConfigError,
                    c.id + ": duplicate request id " + r.request.request_id);
      }
    }
  }
  for (const auto& g : acl) {
    if (!consumer_ids.count(g.consumer_id)) {
      throw Error(ErrorCode::ConfigError,
                  "grant references unknown consumer " + g.consumer_id);
    }
  }
  for (const auto& f : faults) {
    if (!f.node.empty() && !node_ids.count(f.node)) {
      throw Error(ErrorCode::ConfigError,
                  "fault references unknown node " + f.node);
    }
    for (const auto& id : f.group) {
      if (!node_ids.count(id)) {
        throw Error(ErrorCode::ConfigError,
                    "partition references unknown node " + id);
      }
    }
  }
  if (duration_ms <= 0) {
    throw Error(ErrorCode::ConfigError, "duration_ms must be positive");
  }
  if (params.heartbeat_ms <= 0 || params.announce_ms <= 0 ||
      params.commit_timeout_ms <= 0 || params.exchange_timeout_ms <= 0 ||
      params.liveness_timeout_ms < params.heartbeat_ms) {
    throw Error(ErrorCode::ConfigError, "timer parameters must be positive "
                "and liveness_timeout_ms at least heartbeat_ms");
  }
  if (params.min_participants < 2) {
    throw Error(ErrorCode::ConfigError, "min_participants must be at least 2");
  }
  if (params.latency_ms < 0 || params.jitter_ms < 0 || params.max_restarts < 0) {
    throw Error(ErrorCode::ConfigError, "negative parameter");
  }
  Field field(params.field_modulus);
  FixedPointCodec codec{params.fraction_bits, params.half_range};
  codec.validate(field);
}

Json Scenario::to_json() const {
  Json sources_json = Json::array();
  for (const auto& s : sources) {
    Json readings = Json::array();
    for (const auto& r : s.readings) {
      readings.push_back({{"data_type", r.data_type},
                          {"time_ms", r.time_ms},
                          {"value", r.value}});
    }
    Json m = s.metadata.to_json();
    sources_json.push_back(Json{{"id", s.metadata.source_id},
                                {"scope", s.metadata.scope},
                                {"data_types", m.at("data_types")},
                                {"supported_protocols", m.at("supported_protocols")},
                                {"policy", policy_to_json(s.policy)},
                                {"readings", readings}});
  }

  Json consumers_json = Json::array();
  for (const auto& c : consumers) {
    Json requests = Json::array();
    for (const auto& r : c.requests) {
      requests.push_back(
          {{"aggregate", to_string(r.request.aggregate)},
           {"corrupt_auth", r.corrupt_auth},
           {"data_type", r.request.data_type},
           {"issue_at_ms", r.issue_at_ms},
           {"purpose", r.request.purpose},
           {"request_id", r.request.request_id},
           {"scope", r.request.scope},
           {"window",
            {{"end_ms", r.request.window.end_ms},
             {"start_ms", r.request.window.start_ms}}}});
    }
    consumers_json.push_back(
        Json{{"id", c.id}, {"key", c.key}, {"requests", requests}});
  }

  Json acl_json = Json::array();
  for (const auto& g : acl) {
    acl_json.push_back({{"aggregate", to_string(g.aggregate)},
                        {"consumer_id", g.consumer_id},
                        {"data_type", g.data_type},
                        {"purpose", g.purpose}});
  }

  Json faults_json = Json::array();
  for (const auto& f : faults) {
    Json j{{"at_ms", f.at_ms}, {"kind", fault_kind_name(f.kind)}};
    switch (f.kind) {
      case Fault::Kind::DropNode:
      case Fault::Kind::ReviveNode:
        j["node"] = f.node;
        break;
      case Fault::Kind::Partition:
        j["group"] = Json(f.group);
        break;
      case Fault::Kind::Heal:
        break;
      case Fault::Kind::LoseMessage:
        j["match"] = match_to_json(f.match);
        break;
      case Fault::Kind::Delay:
        j["match"] = match_to_json(f.match);
        j["extra_ms"] = f.extra_ms;
        break;
    }
    faults_json.push_back(std::move(j));
  }

  Json j{
      {"acl", acl_json},
      {"consumers", consumers_json},
      {"duration_ms", duration_ms},
      {"faults", faults_json},
      {"gateway_id", gateway_id},
      {"parameters",
       {{"announce_ms", params.announce_ms},
        {"commit_timeout_ms", params.commit_timeout_ms},
        {"exchange_timeout_ms", params.exchange_timeout_ms},
        {"field_modulus", std::to_string(params.field_modulus)},
        {"fraction_bits", params.fraction_bits},
        {"half_range", std::to_string(params.half_range)},
        {"heartbeat_ms", params.heartbeat_ms},
        {"jitter_ms", params.jitter_ms},
        {"latency_ms", params.latency_ms},
        {"liveness_timeout_ms", params.liveness_timeout_ms},
        {"max_restarts", params.max_restarts},
        {"min_participants", params.min_participants}}},
      {"seed", seed},
      {"sources", sources_json},
      {"transport", to_string(transport)},
  };
  if (acl_file) j["acl_file"] = *acl_file;
  if (keys_file) j["keys_file"] = *keys_file;
  return j;
}

Scenario Scenario::from_json(const Json& j) {
  try {
    Scenario sc;
    sc.seed = j.at("seed").get<std::uint64_t>();
    sc.transport = transport_from_string(j.at("transport").get<std::string>());
    sc.duration_ms = j.at("duration_ms").get<TimeMs>();
    if (j.contains("gateway_id")) {
      sc.gateway_id = j.at("gateway_id").get<std::string>();
    }

    const Json& p = j.at("parameters");
    sc.params.min_participants = p.value("min_participants", 3);
    sc.params.heartbeat_ms = p.value("heartbeat_ms", TimeMs{1000});
    sc.params.liveness_timeout_ms = p.value("liveness_timeout_ms", TimeMs{3000});
    sc.params.announce_ms = p.value("announce_ms", TimeMs{1000});
    sc.params.commit_timeout_ms = p.value("commit_timeout_ms", TimeMs{2000});
    sc.params.exchange_timeout_ms = p.value("exchange_timeout_ms", TimeMs{2000});
    sc.params.max_restarts = p.value("max_restarts", 2);
    sc.params.field_modulus =
        std::stoull(p.value("field_modulus", std::to_string(Field::kDefaultModulus)));
    sc.params.fraction_bits = p.value("fraction_bits", 16u);
    sc.params.half_range =
        std::stoull(p.value("half_range", std::to_string(1ULL << 40)));
    sc.params.latency_ms = p.value("latency_ms", TimeMs{10});
    sc.params.jitter_ms = p.value("jitter_ms", TimeMs{0});

    for (const auto& s : j.at("sources")) {
      ScenarioSource src;
      Json metadata{{"source_id", s.at("id")},
                    {"scope", s.at("scope")},
                    {"data_types", s.at("data_types")},
                    {"supported_protocols", s.at("supported_protocols")}};
      src.metadata = SourceMetadata::from_json(metadata);
      src.policy = policy_from_json(s.at("policy"));
      for (const auto& r : s.at("readings")) {
        src.readings.push_back({r.at("data_type").get<std::string>(),
                                r.at("time_ms").get<TimeMs>(),
                                r.at("value").get<double>()});
      }
      sc.sources.push_back(std::move(src));
    }

    for (const auto& c : j.at("consumers")) {
      ScenarioConsumer consumer;
      consumer.id = c.at("id").get<std::string>();
      consumer.key = c.at("key").get<std::string>();
      for (const auto& r : c.at("requests")) {
        ScriptedRequest sr;
        sr.issue_at_ms = r.at("issue_at_ms").get<TimeMs>();
        sr.corrupt_auth = r.value("corrupt_auth", false);
        sr.request.request_id = r.at("request_id").get<std::string>();
        sr.request.consumer_id = consumer.id;
        sr.request.purpose = r.at("purpose").get<std::string>();
        sr.request.aggregate =
            aggregate_from_string(r.at("aggregate").get<std::string>());
        sr.request.data_type = r.at("data_type").get<std::string>();
        sr.request.scope = r.at("scope").get<std::string>();
        sr.request.window = {r.at("window").at("start_ms").get<TimeMs>(),
                             r.at("window").at("end_ms").get<TimeMs>()};
        consumer.requests.push_back(std::move(sr));
      }
      sc.consumers.push_back(std::move(consumer));
    }

    for (const auto& g : j.at("acl")) {
      sc.acl.push_back({g.at("consumer_id").get<std::string>(),
                        g.at("data_type").get<std::string>(),
                        aggregate_from_string(g.at("aggregate").get<std::string>()),
                        g.at("purpose").get<std::string>()});
    }

    for (const auto& f : j.at("faults")) {
      Fault fault;
      fault.at_ms = f.at("at_ms").get<TimeMs>();
      fault.kind = fault_kind_from(f.at("kind").get<std::string>());
      if (f.contains("node")) fault.node = f.at("node").get<std::string>();
      if (f.contains("group")) {
        for (const auto& id : f.at("group")) {
          fault.group.insert(id.get<std::string>());
        }
      }
      if (f.contains("match")) fault.match = match_from_json(f.at("match"));
      if (f.contains("extra_ms")) fault.extra_ms = f.at("extra_ms").get<TimeMs>();
      sc.faults.push_back(std::move(fault));
    }

    if (j.contains("acl_file")) sc.acl_file = j.at("acl_file").get<std::string>();
    if (j.contains("keys_file")) sc.keys_file = j.at("keys_file").get<std::string>();

    sc.validate();
    return sc;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad scenario: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad scenario: ") + e.what());
  }
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, path + ": cannot open");
  }
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::ConfigError, path + ": invalid JSON");
  }
  try {
    return from_json(j);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

void Scenario::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::ConfigError, path + ": cannot write");
  }
  out << to_json().dump(2) << "\n";
}

}  // namespace smcgate
