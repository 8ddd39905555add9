#include <doctest.h>

#include <algorithm>

#include "harness.hpp"
#include "smcgate/policy.hpp"
#include "smcgate/transparency.hpp"

using namespace smcgate;
using namespace smcgate::testing;

TEST_CASE("policy rules match globs, first hit wins") {
  SourcePolicy policy;
  policy.rules.push_back({"display-*", "statistics", "occupancy", true});

  CHECK(evaluate_policy(policy, "display-1", "statistics", "occupancy").commit);
  CHECK_FALSE(
      evaluate_policy(policy, "maintenance-bot", "statistics", "occupancy")
          .commit);
  CHECK_FALSE(
      evaluate_policy(policy, "display-1", "billing", "occupancy").commit);

  SourcePolicy ordered;
  ordered.rules.push_back({"display-1", "*", "*", false});
  ordered.rules.push_back({"display-*", "*", "*", true});
  CHECK_FALSE(evaluate_policy(ordered, "display-1", "x", "y").commit);
  CHECK(evaluate_policy(ordered, "display-2", "x", "y").commit);
}

TEST_CASE("policy evaluation is a pure function") {
  SourcePolicy policy = allow_statistics();
  PolicyDecision first =
      evaluate_policy(policy, "display-9", "statistics", "power");
  for (int i = 0; i < 100; ++i) {
    PolicyDecision again =
        evaluate_policy(policy, "display-9", "statistics", "power");
    CHECK(again.commit == first.commit);
    CHECK(again.reason == first.reason);
  }
}

TEST_CASE("glob matching covers star and question mark") {
  CHECK(glob_match("display-*", "display-123"));
  CHECK(glob_match("*", ""));
  CHECK(glob_match("3.?", "3.A"));
  CHECK_FALSE(glob_match("3.?", "3.AB"));
  CHECK_FALSE(glob_match("display-*", "monitor-1"));
}

TEST_CASE("transparency log appends decisions once and marks delivery") {
  TransparencyLog log;
  TransparencyRecord r;
  r.timestamp_ms = 5;
  r.session_id = "s1";
  r.original_request = "{\"x\":1}";
  r.consumer_id = "display-1";
  r.contributed = true;
  log.append(r);

  CHECK(log.has_record("s1"));
  CHECK_THROWS_AS(log.append(r), Error);
  CHECK_THROWS_AS(log.mark_delivered("unknown", 9), Error);

  CHECK_FALSE(log.records()[0].result_delivered);
  log.mark_delivered("s1", 9);
  CHECK(log.records()[0].result_delivered);
  CHECK(log.records().size() == 1);
  CHECK(log.line_count() == 2);  // append-only: decision line + mark line

  TransparencyLog reparsed = TransparencyLog::parse(log.serialize());
  CHECK(reparsed.records() == log.records());
  CHECK(reparsed.serialize() == log.serialize());
}

TEST_CASE("scripted readings pick the latest value inside the window") {
  ScriptedReadings readings({{"occupancy", 100, 1.0},
                             {"occupancy", 400, 2.0},
                             {"power", 200, 9.0},
                             {"occupancy", 900, 3.0}});
  CHECK(readings.reading_for({"occupancy", {0, 500}}) == 2.0);
  CHECK(readings.reading_for({"occupancy", {0, 1000}}) == 3.0);
  CHECK(readings.reading_for({"power", {0, 1000}}) == 9.0);
  CHECK_FALSE(readings.reading_for({"occupancy", {450, 800}}).has_value());
  CHECK_FALSE(readings.reading_for({"humidity", {0, 1000}}).has_value());
}

TEST_CASE("a fresh source announces once per interval until it is set up") {
  // No gateway in this cluster; a consumer node only witnesses broadcasts.
  ScenarioSource scripted = make_source("s1", "3.A", 1.0);
  SourceConfig config;
  config.metadata = scripted.metadata;
  config.policy = scripted.policy;
  SourceNode source(config,
                    std::make_shared<ScriptedReadings>(scripted.readings));
  ConsumerConfig witness_config;
  witness_config.id = "display-1";
  ConsumerNode witness(witness_config);

  SimNetwork net(1, 0, 0);
  net.register_node(&source);
  net.register_node(&witness);
  net.start();
  net.advance_time(5500);

  // t = 0..5000 in 1 s steps: six announces, none suppressed.
  FrameCount announces =
      count_frames(net.transcript(), MessageKind::DiscoveryAnnounce,
                   source.node_id(), witness.node_id());
  CHECK(announces.total() == 6);
  CHECK_FALSE(source.set_up());
}

TEST_CASE("announcing stops after setup and resumes after gateway loss") {
  Scenario sc = smoke_scenario();
  sc.duration_ms = 12000;
  sc.params.latency_ms = 0;
  sc.consumers[0].requests.clear();
  sc.acl.clear();
  // Gateway dies at 4 s and comes back at 9 s.
  Fault drop;
  drop.at_ms = 4000;
  drop.kind = Fault::Kind::DropNode;
  drop.node = "gateway";
  Fault revive;
  revive.at_ms = 9000;
  revive.kind = Fault::Kind::ReviveNode;
  revive.node = "gateway";
  sc.faults = {drop, revive};

  RunArtifacts artifacts = run_scenario(sc);

  std::vector<TimeMs> announce_times;
  for (const auto& e : artifacts.transcript.entries()) {
    if (e.from != "s1" || e.to != "gateway") continue;
    if (decode_message(e.frame).kind == MessageKind::DiscoveryAnnounce) {
      announce_times.push_back(e.time_ms);
    }
  }
  REQUIRE(!announce_times.empty());
  // Setup completes at t=0; no announcing while the gateway is healthy.
  for (TimeMs t : announce_times) {
    CHECK((t == 0 || t > 4000));
  }
  // Silence becomes conclusive after the liveness timeout; discovery must
  // resume within two further heartbeat intervals.
  auto resumed = std::find_if(announce_times.begin(), announce_times.end(),
                              [](TimeMs t) { return t > 4000; });
  REQUIRE(resumed != announce_times.end());
  CHECK(*resumed <=
        4000 + sc.params.liveness_timeout_ms + 2 * sc.params.heartbeat_ms);

  // After revival the source is set up again and heartbeats flow.
  int late_heartbeats = 0;
  for (const auto& e : artifacts.transcript.entries()) {
    if (e.from == "s1" && e.to == "gateway" && e.time_ms > 9500 && e.delivered &&
        decode_message(e.frame).kind == MessageKind::Heartbeat) {
      ++late_heartbeats;
    }
  }
  CHECK(late_heartbeats > 0);
}

TEST_CASE("participation exchanges exactly the expected frames") {
  Scenario sc = smoke_scenario();
  RunArtifacts artifacts = run_scenario(sc);
  CHECK(single_result(artifacts).ok);

  for (const std::string id : {"s1", "s2", "s3"}) {
    FrameCount out =
        count_frames(artifacts.transcript, MessageKind::ShareTransfer, id, "");
    FrameCount in =
        count_frames(artifacts.transcript, MessageKind::ShareTransfer, "", id);
    FrameCount partials = count_frames(artifacts.transcript,
                                       MessageKind::PartialSum, id, "gateway");
    CHECK(out.total() == 2);
    CHECK(in.total() == 2);
    CHECK(partials.total() == 1);
  }
}

TEST_CASE("raw readings never appear in gateway-bound traffic") {
  Scenario sc = smoke_scenario(AggregateKind::Average, {22.5, 19.25, 21.0});
  RunArtifacts artifacts = run_scenario(sc);
  REQUIRE(single_result(artifacts).ok);

  Field field(sc.params.field_modulus);
  FixedPointCodec codec{sc.params.fraction_bits, sc.params.half_range};
  std::string encoded = to_decimal(encode_fixed(22.5, codec, field));
  for (const auto& e : artifacts.transcript.entries()) {
    if (e.to != "gateway") continue;
    CHECK(e.frame.find(encoded) == std::string::npos);
  }
  CHECK(artifacts.report.find("blindness")->passed);
}

TEST_CASE("each announced session leaves exactly one transparency record") {
  Scenario sc = smoke_scenario();
  sc.consumers[0].requests.push_back(
      make_request("q2", AggregateKind::Average, "3.A", "occupancy", 3000));
  RunArtifacts artifacts = run_scenario(sc);
  REQUIRE(artifacts.results.size() == 2);
  CHECK(artifacts.results[0].ok);
  CHECK(artifacts.results[1].ok);

  for (const auto& [node, text] : artifacts.transparency_logs) {
    auto records = TransparencyLog::parse(text).records();
    CHECK(records.size() == 2);  // one per session
    for (const auto& r : records) {
      CHECK(r.contributed);
      CHECK(r.result_delivered);
      // The embedded bytes parse back to the consumer's request.
      DataRequest req = DataRequest::parse(r.original_request);
      CHECK(req.consumer_id == "display-1");
    }
  }
  CHECK(artifacts.report.find("transparency_completeness")->passed);
}

TEST_CASE("a source with no reading in the window vetoes") {
  Scenario sc = smoke_scenario();
  sc.sources[1].readings = {{"occupancy", 999999999, 2.0}};  // outside window
  RunArtifacts artifacts = run_scenario(sc);
  const RequestRecord& r = single_result(artifacts);
  CHECK_FALSE(r.ok);
  CHECK(r.error_code == "Vetoed");

  auto records =
      TransparencyLog::parse(artifacts.transparency_logs.at("s2")).records();
  REQUIRE(records.size() == 1);
  CHECK_FALSE(records[0].contributed);
}
