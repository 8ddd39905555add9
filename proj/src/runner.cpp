#include "smcgate/runner.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "smcgate/socket_network.hpp"

namespace smcgate {

namespace {

struct Cluster {
  std::unique_ptr<GatewayNode> gateway;
  std::vector<std::unique_ptr<SourceNode>> sources;
  std::vector<std::unique_ptr<ConsumerNode>> consumers;
};

Cluster build_cluster(const Scenario& sc) {
  Cluster cluster;

  GatewayConfig gw;
  gw.id = sc.gateway_id;
  gw.min_participants = sc.params.min_participants;
  gw.heartbeat_interval_ms = sc.params.heartbeat_ms;
  gw.liveness_timeout_ms = sc.params.liveness_timeout_ms;
  gw.commit_timeout_ms = sc.params.commit_timeout_ms;
  gw.exchange_timeout_ms = sc.params.exchange_timeout_ms;
  gw.max_restarts = sc.params.max_restarts;
  gw.field_modulus = sc.params.field_modulus;
  gw.codec = {sc.params.fraction_bits, sc.params.half_range};
  gw.acl_file = sc.acl_file;
  gw.keys_file = sc.keys_file;

  AccessControlList acl;
  for (const auto& g : sc.acl) acl.add(g);
  std::map<std::string, std::string> keys;
  for (const auto& c : sc.consumers) keys[c.id] = c.key;

  cluster.gateway = std::make_unique<GatewayNode>(gw, std::move(acl), std::move(keys));

  for (const auto& s : sc.sources) {
    SourceConfig config;
    config.metadata = s.metadata;
    config.policy = s.policy;
    config.announce_interval_ms = sc.params.announce_ms;
    config.heartbeat_interval_ms = sc.params.heartbeat_ms;
    config.liveness_timeout_ms = sc.params.liveness_timeout_ms;
    config.exchange_timeout_ms = sc.params.exchange_timeout_ms;
    config.field_modulus = sc.params.field_modulus;
    config.seed = sc.seed;
    cluster.sources.push_back(std::make_unique<SourceNode>(
        std::move(config), std::make_shared<ScriptedReadings>(s.readings)));
  }

  for (const auto& c : sc.consumers) {
    ConsumerConfig config;
    config.id = c.id;
    config.key = c.key;
    config.gateway_id = sc.gateway_id;
    config.requests = c.requests;
    cluster.consumers.push_back(std::make_unique<ConsumerNode>(std::move(config)));
  }
  return cluster;
}

std::vector<RequestRecord> collect_results(const Scenario& sc,
                                           const Cluster& cluster) {
  std::map<std::string, RequestStats> stats;
  for (const auto& s : cluster.gateway->request_stats()) {
    stats[s.consumer + "/" + s.request_id] = s;
  }

  std::vector<RequestRecord> out;
  for (const auto& consumer : cluster.consumers) {
    for (const auto& o : consumer->outcomes()) {
      RequestRecord r;
      r.consumer = consumer->node_id();
      r.request_id = o.request_id;
      r.responded = o.responded;
      r.ok = o.ok;
      r.value = o.value;
      r.contributors = o.contributors;
      r.error_code = o.responded && !o.ok ? o.code : (o.responded ? "" : "Unresolved");
      r.detail = o.detail;
      r.issued_at_ms = o.issued_at_ms;
      r.completed_at_ms = o.completed_at_ms;
      auto it = stats.find(r.consumer + "/" + r.request_id);
      if (it != stats.end()) r.restarts = it->second.restarts;
      out.push_back(std::move(r));
    }
  }
  return out;
}

RunArtifacts finish(const Scenario& sc, const Cluster& cluster,
                    Transcript transcript) {
  RunArtifacts artifacts;
  artifacts.results = collect_results(sc, cluster);
  artifacts.transcript = std::move(transcript);
  for (const auto& source : cluster.sources) {
    artifacts.transparency_logs[source->node_id()] =
        source->transparency_log().serialize();
  }
  artifacts.report =
      verify_run(sc, artifacts.transcript, artifacts.transparency_logs);
  return artifacts;
}

}  // namespace

Json RequestRecord::to_json() const {
  Json j{{"completed_at_ms", completed_at_ms},
         {"consumer", consumer},
         {"issued_at_ms", issued_at_ms},
         {"request_id", request_id},
         {"restarts", restarts}};
  if (!responded) {
    j["outcome"] = "unresolved";
  } else if (ok) {
    j["outcome"] = "ok";
    j["value"] = value;
    j["contributors"] = contributors;
  } else {
    j["outcome"] = "error";
    j["code"] = error_code;
    j["detail"] = detail;
  }
  return j;
}

std::string RunArtifacts::results_ndjson() const {
  std::ostringstream out;
  for (const auto& r : results) out << canonical_dump(r.to_json()) << "\n";
  return out.str();
}

RunArtifacts run_scenario(const Scenario& scenario) {
  scenario.validate();
  Cluster cluster = build_cluster(scenario);

  if (scenario.transport == TransportKind::Sim) {
    SimNetwork net(scenario.seed, scenario.params.latency_ms,
                   scenario.params.jitter_ms);
    net.register_node(cluster.gateway.get());
    for (auto& s : cluster.sources) net.register_node(s.get());
    for (auto& c : cluster.consumers) net.register_node(c.get());
    for (const auto& f : scenario.faults) net.schedule_fault(f);
    net.start();
    net.advance_time(scenario.duration_ms);
    return finish(scenario, cluster, net.transcript());
  }

  SocketNetwork net;
  net.register_node(cluster.gateway.get());
  for (auto& s : cluster.sources) net.register_node(s.get());
  for (auto& c : cluster.consumers) net.register_node(c.get());
  net.start();
  net.run_until(
      [&] {
        for (const auto& c : cluster.consumers) {
          if (!c->all_responded()) return false;
        }
        return true;
      },
      scenario.duration_ms);
  net.stop();
  return finish(scenario, cluster, net.transcript());
}

void write_artifacts(const RunArtifacts& artifacts, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "logs");

  std::ofstream(fs::path(out_dir) / "transcript.ndjson")
      << artifacts.transcript.serialize();
  std::ofstream(fs::path(out_dir) / "results.ndjson")
      << artifacts.results_ndjson();
  std::ofstream(fs::path(out_dir) / "report.txt") << artifacts.report.to_text();
  for (const auto& [node, text] : artifacts.transparency_logs) {
    std::ofstream(fs::path(out_dir) / "logs" / (node + ".ndjson")) << text;
  }
}

}  // namespace smcgate
