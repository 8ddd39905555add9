#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "harness.hpp"
#include "smcgate/transparency.hpp"

using namespace smcgate;
using namespace smcgate::testing;

TEST_CASE("directory announce rules: insert, refresh, replace, reject") {
  MetadataDirectory dir(3000);
  SourceMetadata m;
  m.source_id = "s1";
  m.scope = "3.A";
  m.data_types = {{"occupancy", "persons", ""}};
  m.supported_protocols = {AggregateKind::Sum};

  CHECK(dir.classify_announce("s1", "tcp://a", 0) == AnnounceAction::NewSource);
  dir.upsert(m, "tcp://a", 0);
  CHECK(dir.classify_announce("s1", "tcp://a", 100) == AnnounceAction::Refresh);
  // Same id, different endpoint, entry still live: imposter guard.
  CHECK(dir.classify_announce("s1", "tcp://b", 100) == AnnounceAction::Reject);
  // Heartbeats lapse; the crashed source may re-register from elsewhere.
  CHECK(dir.classify_announce("s1", "tcp://b", 5000) == AnnounceAction::Replace);
  dir.upsert(m, "tcp://b", 5000);
  CHECK(dir.size() == 1);
  CHECK(dir.find("s1")->endpoint == "tcp://b");
}

TEST_CASE("directory liveness is heartbeat-driven") {
  MetadataDirectory dir(3000);
  SourceMetadata m;
  m.source_id = "s1";
  m.scope = "3.A";
  m.data_types = {{"occupancy", "persons", ""}};
  m.supported_protocols = {AggregateKind::Average};
  dir.upsert(m, "tcp://a", 0);

  CHECK(dir.is_live("s1", 3000));
  CHECK_FALSE(dir.is_live("s1", 3001));
  dir.record_heartbeat("s1", 2000);
  CHECK(dir.is_live("s1", 5000));
  dir.mark_dead("s1");
  CHECK_FALSE(dir.is_live("s1", 5000));
  CHECK(dir.live_matching("occupancy", "3.*", AggregateKind::Average, 5000)
            .empty());
}

TEST_CASE("directory of ten sources forms regardless of announce order") {
  Mt19937Random rng(77);
  for (int round = 0; round < 5; ++round) {
    Scenario sc;
    sc.seed = 100 + round;
    sc.duration_ms = 1500;
    for (int i = 0; i < 10; ++i) {
      sc.sources.push_back(make_source("s" + std::to_string(i), "3.A", 1.0));
    }
    // Random registration order changes announce order on the wire.
    for (std::size_t i = sc.sources.size(); i > 1; --i) {
      std::swap(sc.sources[i - 1], sc.sources[rng.uniform(i)]);
    }
    ScenarioConsumer probe;
    probe.id = "display-1";
    probe.key = "k";
    sc.consumers.push_back(probe);

    RunArtifacts artifacts = run_scenario(sc);
    std::set<NodeId> acked;
    for (const auto& e : artifacts.transcript.entries()) {
      if (e.from != "gateway" || !e.delivered) continue;
      ProtocolMessage m = decode_message(e.frame);
      if (m.kind == MessageKind::SetupMetadata &&
          m.payload.value("action", "") == "ack") {
        acked.insert(e.to);
      }
    }
    CHECK(acked.size() == 10);
  }
}

TEST_CASE("the canonical floor-average request is answered") {
  Scenario sc = smoke_scenario();
  RunArtifacts artifacts = run_scenario(sc);
  const RequestRecord& r = single_result(artifacts);
  CHECK(r.ok);
  CHECK(r.value == 2.5);
  CHECK(r.contributors == 3);
  CHECK(r.restarts == 0);
  CHECK(artifacts.checks_passed());

  // Exactly one result frame reached exactly one consumer.
  FrameCount results = count_frames(artifacts.transcript, MessageKind::Result,
                                    "gateway", "display-1");
  CHECK(results.delivered == 1);
}

TEST_CASE("sum and count aggregate across matching scopes") {
  Scenario sc = smoke_scenario(AggregateKind::Sum, {10.5, -3.25, 7.0});
  sc.sources[2].metadata.scope = "3.B";
  sc.consumers[0].requests = {make_request("q-sum", AggregateKind::Sum, "3.*")};
  sc.acl = {{"display-1", "occupancy", AggregateKind::Sum, "statistics"}};
  RunArtifacts artifacts = run_scenario(sc);
  const RequestRecord& r = single_result(artifacts);
  CHECK(r.ok);
  CHECK(r.value == 14.25);

  Scenario count_sc = smoke_scenario(AggregateKind::Count, {1.0, 2.0, 3.0});
  count_sc.consumers[0].requests = {make_request("q-count", AggregateKind::Count)};
  count_sc.acl = {{"display-1", "occupancy", AggregateKind::Count, "statistics"}};
  RunArtifacts count_run = run_scenario(count_sc);
  CHECK(single_result(count_run).value == 3.0);
}

TEST_CASE("a tampered auth tag fails closed before any source is contacted") {
  Scenario sc = smoke_scenario();
  sc.consumers[0].requests[0].corrupt_auth = true;
  RunArtifacts artifacts = run_scenario(sc);
  const RequestRecord& r = single_result(artifacts);
  CHECK_FALSE(r.ok);
  CHECK(r.error_code == "AuthFailed");

  CHECK(count_frames(artifacts.transcript, MessageKind::Announce).total() == 0);
  CHECK(count_frames(artifacts.transcript, MessageKind::ShareTransfer).total() == 0);
  CHECK(artifacts.report.find("fail_closed")->passed);
}

TEST_CASE("an unknown consumer key or identity mismatch is AuthFailed") {
  Scenario sc = smoke_scenario();
  ScenarioConsumer stranger;
  stranger.id = "display-2";
  stranger.key = "k-display-2";
  stranger.requests = {make_request("q-x", AggregateKind::Average)};
  sc.consumers.push_back(stranger);
  // No key registered: drop it from the key map by leaving ACL as-is and
  // removing the registration below.
  RunArtifacts artifacts = run_scenario(sc);
  // display-2 signed correctly but holds no grant.
  for (const auto& r : artifacts.results) {
    if (r.consumer == "display-2") {
      CHECK_FALSE(r.ok);
      CHECK(r.error_code == "AccessDenied");
    } else {
      CHECK(r.ok);
    }
  }
}

TEST_CASE("requests failing plausibility are rejected without a session") {
  Scenario sc = smoke_scenario();
  sc.consumers[0].requests = {
      make_request("q-unknown", AggregateKind::Average, "3.A", "humidity"),
      make_request("q-window", AggregateKind::Average, "3.A", "occupancy", 2200),
      make_request("q-scope", AggregateKind::Average, "9.Z", "occupancy", 2400),
  };
  sc.consumers[0].requests[1].request.window = {500, 500};  // degenerate
  sc.acl = {
      {"display-1", "humidity", AggregateKind::Average, "statistics"},
      {"display-1", "occupancy", AggregateKind::Average, "statistics"},
  };
  RunArtifacts artifacts = run_scenario(sc);
  REQUIRE(artifacts.results.size() == 3);
  for (const auto& r : artifacts.results) {
    CHECK_FALSE(r.ok);
    CHECK(r.error_code == "Implausible");
  }
  CHECK(count_frames(artifacts.transcript, MessageKind::Announce).total() == 0);
}

TEST_CASE("too few matching sources is a structured error") {
  Scenario sc = smoke_scenario();
  sc.sources.resize(2);  // min_participants stays 3
  RunArtifacts artifacts = run_scenario(sc);
  const RequestRecord& r = single_result(artifacts);
  CHECK_FALSE(r.ok);
  CHECK(r.error_code == "InsufficientSources");
  CHECK(r.detail == "found 2, required 3");
}

TEST_CASE("one veto aborts the session before any share moves") {
  Scenario sc = smoke_scenario();
  sc.sources.push_back(make_source("s4", "3.A", 9.0));
  SourcePolicy deny;
  deny.rules.push_back({"display-*", "*", "*", false});
  sc.sources[3].policy = deny;

  RunArtifacts artifacts = run_scenario(sc);
  const RequestRecord& r = single_result(artifacts);
  CHECK_FALSE(r.ok);
  CHECK(r.error_code == "Vetoed");

  CHECK(count_frames(artifacts.transcript, MessageKind::ShareTransfer).total() == 0);
  CHECK(count_frames(artifacts.transcript, MessageKind::PartialSum).total() == 0);

  // The three committed sources receive the abort; the vetoer does not.
  for (const std::string id : {"s1", "s2", "s3"}) {
    CHECK(count_frames(artifacts.transcript, MessageKind::Abort, "gateway", id)
              .total() == 1);
  }
  CHECK(count_frames(artifacts.transcript, MessageKind::Abort, "gateway", "s4")
            .total() == 0);

  // Every participant, including the vetoer, recorded its decision.
  for (const std::string id : {"s1", "s2", "s3", "s4"}) {
    auto records =
        TransparencyLog::parse(artifacts.transparency_logs.at(id)).records();
    REQUIRE(records.size() == 1);
    CHECK(records[0].contributed == (id != "s4"));
  }
  CHECK(artifacts.checks_passed());
}

TEST_CASE("a mid-exchange crash restarts the session without the dead source") {
  Scenario sc = smoke_scenario();
  sc.sources.push_back(make_source("s4", "3.A", 8.0));
  sc.duration_ms = 12000;
  // Crash while shares are in flight (request at 2000, latency 10).
  Fault crash;
  crash.at_ms = 2045;
  crash.kind = Fault::Kind::DropNode;
  crash.node = "s2";
  sc.faults = {crash};

  RunArtifacts artifacts = run_scenario(sc);
  const RequestRecord& r = single_result(artifacts);
  CHECK(r.ok);
  CHECK(r.restarts == 1);
  CHECK(r.contributors == 3);
  CHECK(r.value == (1.0 + 4.5 + 8.0) / 3);

  // Fresh randomness: restarted attempt shares no ShareTransfer payload
  // with the aborted one.
  std::map<std::string, std::set<std::string>> payloads_by_session;
  for (const auto& e : artifacts.transcript.entries()) {
    ProtocolMessage m;
    try {
      m = decode_message(e.frame);
    } catch (const Error&) {
      continue;
    }
    if (m.kind == MessageKind::ShareTransfer) {
      payloads_by_session[m.session_id].insert(
          m.payload.value("share", ""));
    }
  }
  REQUIRE(payloads_by_session.size() == 2);
  auto it = payloads_by_session.begin();
  const std::set<std::string>& first = it->second;
  const std::set<std::string>& second = (++it)->second;
  for (const auto& payload : first) {
    CHECK_FALSE(second.count(payload));
  }
  CHECK(artifacts.checks_passed());
}

TEST_CASE("quorum loss after a crash fails the session") {
  Scenario sc = smoke_scenario();
  sc.duration_ms = 12000;
  Fault crash;
  crash.at_ms = 2045;
  crash.kind = Fault::Kind::DropNode;
  crash.node = "s2";
  sc.faults = {crash};

  RunArtifacts artifacts = run_scenario(sc);
  const RequestRecord& r = single_result(artifacts);
  CHECK_FALSE(r.ok);
  CHECK(r.error_code == "SessionFailed");
  CHECK(r.restarts == 0);
}

TEST_CASE("restarts are bounded under repeated churn") {
  Scenario sc = smoke_scenario();
  for (int i = 4; i <= 6; ++i) {
    sc.sources.push_back(make_source("s" + std::to_string(i), "3.A", 1.0));
  }
  sc.duration_ms = 30000;
  // Every attempt loses one partial sum: the first three attempts each lose
  // a different source's contribution.
  for (const std::string id : {"s1", "s2", "s3"}) {
    Fault lose;
    lose.at_ms = 0;
    lose.kind = Fault::Kind::LoseMessage;
    lose.match.kind = "PartialSum";
    lose.match.sender = id;
    sc.faults.push_back(lose);
  }

  RunArtifacts artifacts = run_scenario(sc);
  const RequestRecord& r = single_result(artifacts);
  CHECK_FALSE(r.ok);
  CHECK(r.error_code == "SessionFailed");
  CHECK(r.restarts == 2);
  CHECK(r.detail.find("attempts=2") != std::string::npos);
}

TEST_CASE("session specs embed the consumer request byte for byte") {
  Mt19937Random rng(31337);
  auto random_token = [&](std::size_t length) {
    std::string token;
    for (std::size_t i = 0; i < length; ++i) {
      token.push_back("abcdefghijklmnopqrstuvwxyz-0123456789"[rng.uniform(37)]);
    }
    return token;
  };

  for (int round = 0; round < 10; ++round) {
    Scenario sc = smoke_scenario();
    ScriptedRequest req = make_request(random_token(12), AggregateKind::Average);
    req.request.purpose = random_token(8);
    req.request.scope = "3.A";
    sc.consumers[0].requests = {req};
    sc.acl = {{"display-1", "occupancy", AggregateKind::Average,
               req.request.purpose}};

    RunArtifacts artifacts = run_scenario(sc);
    REQUIRE(single_result(artifacts).ok);

    // Reconstruct what the consumer signed and sent.
    DataRequest sent = req.request;
    sent.consumer_id = "display-1";
    sent.sign("k-display-1");

    int announces = 0;
    for (const auto& e : artifacts.transcript.entries()) {
      ProtocolMessage m;
      try {
        m = decode_message(e.frame);
      } catch (const Error&) {
        continue;
      }
      if (m.kind != MessageKind::Announce) continue;
      ++announces;
      SessionSpec spec = SessionSpec::from_json(m.payload.at("spec"));
      CHECK(spec.original_request == sent.canonical_bytes());
    }
    CHECK(announces == 3);
  }
}

TEST_CASE("directory listing abstracts from sources and tracks liveness") {
  Scenario sc = smoke_scenario();
  sc.sources[2].metadata.scope = "3.B";
  sc.duration_ms = 16000;
  sc.consumers[0].requests.clear();
  Fault crash;
  crash.at_ms = 6000;
  crash.kind = Fault::Kind::DropNode;
  crash.node = "s3";
  sc.faults = {crash};

  // Issue two directory queries by hand: one before, one after the crash.
  GatewayConfig gw;
  gw.min_participants = sc.params.min_participants;
  gw.codec = {sc.params.fraction_bits, sc.params.half_range};
  AccessControlList acl;
  GatewayNode gateway(gw, acl, {});

  std::vector<std::unique_ptr<SourceNode>> sources;
  for (const auto& s : sc.sources) {
    SourceConfig config;
    config.metadata = s.metadata;
    config.policy = s.policy;
    sources.push_back(std::make_unique<SourceNode>(
        config, std::make_shared<ScriptedReadings>(s.readings)));
  }

  struct Probe final : NetworkNode {
    NodeId id = "probe";
    std::vector<Json> listings;
    const NodeId& node_id() const override { return id; }
    void on_frame(Network& net, const NodeId& from,
                  const std::string& frame) override {
      ProtocolMessage m = decode_message(frame);
      if (m.kind == MessageKind::DirectoryListing) listings.push_back(m.payload);
    }
  } probe;

  SimNetwork net(5, 10, 0);
  net.register_node(&gateway);
  for (auto& s : sources) net.register_node(s.get());
  net.register_node(&probe);
  net.schedule_fault(crash);
  net.start();

  net.advance_time(2000);
  ProtocolMessage query;
  query.kind = MessageKind::DirectoryQuery;
  query.sender = "probe";
  net.send("probe", "gateway", encode_message(query));
  // One liveness timeout after the crash the listing must have shrunk.
  net.advance_time(6000 + 3000 + 50);
  net.send("probe", "gateway", encode_message(query));
  net.advance_time(9200);

  REQUIRE(probe.listings.size() == 2);
  const Json& before = probe.listings[0];
  CHECK(before.at("data_types").at("occupancy") ==
        Json(std::vector<std::string>{"3.A", "3.B"}));
  CHECK(before.at("aggregates") ==
        Json(std::vector<std::string>{"average", "count", "sum"}));
  CHECK(before.dump().find("s1") == std::string::npos);  // no identities
  CHECK(before.dump().find("sim://") == std::string::npos);  // no endpoints

  const Json& after = probe.listings[1];
  CHECK(after.at("data_types").at("occupancy") ==
        Json(std::vector<std::string>{"3.A"}));

  // Empty directory: a fresh gateway with no sources lists nothing.
  GatewayNode empty_gateway(gw, AccessControlList{}, {});
  CHECK(empty_gateway.directory().listing(0) ==
        Json{{"aggregates", Json::array()}, {"data_types", Json::object()}});
}

TEST_CASE("acl and keys reload on the control frame") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "smcgate_reload_test";
  fs::create_directories(dir);
  fs::path acl_path = dir / "acl.ndjson";
  fs::path keys_path = dir / "keys.ndjson";

  {
    std::ofstream acl(acl_path);
    acl << R"({"aggregate":"average","consumer_id":"nobody","data_type":"occupancy","purpose":"statistics"})"
        << "\n";
    std::ofstream keys(keys_path);
    keys << R"({"consumer_id":"display-1","key":"k-display-1"})" << "\n";
  }

  Scenario sc = smoke_scenario();
  sc.acl_file = acl_path.string();
  sc.keys_file = keys_path.string();
  sc.consumers[0].requests = {
      make_request("q-before", AggregateKind::Average, "3.A", "occupancy", 2000),
      make_request("q-after", AggregateKind::Average, "3.A", "occupancy", 4000),
  };
  sc.duration_ms = 8000;

  // Rewrite the grant file mid-run and poke the gateway; ConsumerNode has no
  // reload scripting, so drive the rewrite through a fault-free side channel:
  // rewrite now, reload between the two requests via a scripted control node.
  struct Operator final : NetworkNode {
    NodeId id = "operator";
    fs::path acl_path;
    std::uint64_t token = 0;
    const NodeId& node_id() const override { return id; }
    void on_start(Network& net) override { token = net.set_timer(id, 3000); }
    void on_timer(Network& net, std::uint64_t fired) override {
      if (fired != token) return;
      std::ofstream acl(acl_path);
      acl << R"({"aggregate":"average","consumer_id":"display-1","data_type":"occupancy","purpose":"statistics"})"
          << "\n";
      ProtocolMessage m;
      m.kind = MessageKind::ReloadControl;
      m.sender = id;
      send_message(net, id, "gateway", m);
    }
    void on_frame(Network&, const NodeId&, const std::string&) override {}
  } op;
  op.acl_path = acl_path;

  GatewayConfig gw;
  gw.min_participants = 3;
  gw.codec = {16, 1ULL << 40};
  gw.acl_file = acl_path.string();
  gw.keys_file = keys_path.string();
  GatewayNode gateway(gw, AccessControlList{}, {});

  std::vector<std::unique_ptr<SourceNode>> sources;
  for (const auto& s : sc.sources) {
    SourceConfig config;
    config.metadata = s.metadata;
    config.policy = s.policy;
    sources.push_back(std::make_unique<SourceNode>(
        config, std::make_shared<ScriptedReadings>(s.readings)));
  }
  ConsumerConfig cc;
  cc.id = "display-1";
  cc.key = "k-display-1";
  cc.requests = sc.consumers[0].requests;
  ConsumerNode consumer(cc);

  SimNetwork net(9, 10, 0);
  net.register_node(&gateway);
  for (auto& s : sources) net.register_node(s.get());
  net.register_node(&consumer);
  net.register_node(&op);
  net.start();
  net.advance_time(sc.duration_ms);

  REQUIRE(consumer.outcomes().size() == 2);
  CHECK_FALSE(consumer.outcomes()[0].ok);
  CHECK(consumer.outcomes()[0].code == "AccessDenied");
  CHECK(consumer.outcomes()[1].ok);
  CHECK(consumer.outcomes()[1].value == 2.5);

  fs::remove_all(dir);
}

TEST_CASE("garbage frames neither crash the gateway nor corrupt a session") {
  Scenario sc = smoke_scenario();

  struct Fuzzer final : NetworkNode {
    NodeId id = "fuzzer";
    Mt19937Random rng{4242};
    std::uint64_t token = 0;
    const NodeId& node_id() const override { return id; }
    void on_start(Network& net) override { token = net.set_timer(id, 50); }
    void on_timer(Network& net, std::uint64_t) override {
      static const char* kinds[] = {"Commit", "Veto", "PartialSum", "Abort",
                                    "ShareTransfer", "Request", "Heartbeat",
                                    "DiscoveryAnnounce", "SetupMetadata"};
      for (int i = 0; i < 3; ++i) {
        ProtocolMessage m;
        m.kind = message_kind_from_string(kinds[rng.uniform(9)]);
        m.session_id = rng.uniform(2) ? "display-1/q1/a0" : "nonsense";
        m.sender = rng.uniform(2) ? id : "s1";
        switch (rng.uniform(4)) {
          case 0: m.payload = {{"share", "12"}}; break;
          case 1: m.payload = {{"partial", 3.5}}; break;
          case 2: m.payload = {{"reason", "peer_timeout"}, {"missing", "x"}}; break;
          default: m.payload = Json::object(); break;
        }
        send_message(net, id, "gateway", m);
        net.send(id, "gateway", "not json at all\n");
      }
      token = net.set_timer(id, 100);
    }
    void on_frame(Network&, const NodeId&, const std::string&) override {}
  } fuzzer;

  GatewayConfig gw;
  gw.min_participants = 3;
  gw.codec = {16, 1ULL << 40};
  AccessControlList acl;
  for (const auto& g : sc.acl) acl.add(g);
  GatewayNode gateway(gw, acl, {{"display-1", "k-display-1"}});

  std::vector<std::unique_ptr<SourceNode>> sources;
  for (const auto& s : sc.sources) {
    SourceConfig config;
    config.metadata = s.metadata;
    config.policy = s.policy;
    sources.push_back(std::make_unique<SourceNode>(
        config, std::make_shared<ScriptedReadings>(s.readings)));
  }
  ConsumerConfig cc;
  cc.id = "display-1";
  cc.key = "k-display-1";
  cc.requests = sc.consumers[0].requests;
  ConsumerNode consumer(cc);

  SimNetwork net(77, 10, 3);
  net.register_node(&gateway);
  for (auto& s : sources) net.register_node(s.get());
  net.register_node(&consumer);
  net.register_node(&fuzzer);
  net.start();
  CHECK_NOTHROW(net.advance_time(sc.duration_ms));

  // The genuine request still succeeds in the noise.
  REQUIRE(consumer.outcomes().size() == 1);
  CHECK(consumer.outcomes()[0].ok);
  CHECK(consumer.outcomes()[0].value == 2.5);
}
