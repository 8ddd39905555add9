#include <doctest.h>

#include <numeric>

#include "smcgate/protocol.hpp"

using namespace smcgate;

namespace {

SessionSpec small_spec(std::vector<PartyId> ids, AggregateKind kind,
                       FixedPointCodec codec) {
  SessionSpec spec;
  spec.session_id = "s1";
  for (const auto& id : ids) spec.participants.push_back({id, "sim://" + id});
  spec.data_selector = {"occupancy", {0, 1000}};
  spec.protocol_id = kind;
  spec.codec = codec;
  spec.original_request = "{}";
  spec.min_participants = 2;
  return spec;
}

}  // namespace

TEST_CASE("prepare_shares matches the scripted field example") {
  Field f31(31);
  ScriptedRandom rng({5, 7});
  SessionSpec spec = small_spec({"A", "B", "C"}, AggregateKind::Sum, {0, 15});
  auto shares = source_prepare_shares(f31.element(20), spec, "A", rng, f31);
  CHECK(shares.at("A") == f31.element(5));
  CHECK(shares.at("B") == f31.element(7));
  CHECK(shares.at("C") == f31.element(8));
}

TEST_CASE("prepare_shares of zero gives opposite shares for two parties") {
  Field f;
  Mt19937Random rng(11);
  SessionSpec spec = small_spec({"A", "B"}, AggregateKind::Sum, {});
  auto shares = source_prepare_shares(f.zero(), spec, "B", rng, f);
  CHECK(f.add(shares.at("A"), shares.at("B")) == f.zero());
}

TEST_CASE("prepare_shares rejects a caller outside the session") {
  Field f;
  Mt19937Random rng(12);
  SessionSpec spec = small_spec({"A", "B"}, AggregateKind::Sum, {});
  try {
    source_prepare_shares(f.element(3), spec, "intruder", rng, f);
    FAIL("expected NotParticipant");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotParticipant);
  }
}

TEST_CASE("emitted shares always reconstruct the reading") {
  Field f;
  Mt19937Random rng(13);
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 2 + rng.uniform(7);
    std::vector<PartyId> ids;
    for (std::size_t p = 0; p < n; ++p) ids.push_back("s" + std::to_string(p));
    SessionSpec spec = small_spec(ids, AggregateKind::Sum, {});
    FieldElement value = f.sample(rng);
    auto shares = source_prepare_shares(value, spec, ids[0], rng, f);
    ShareVector sv;
    for (const auto& [party, share] : shares) sv.shares.emplace_back(party, share);
    CHECK(reconstruct_additive(sv, f) == value);
  }
}

TEST_CASE("accumulate folds own and received shares") {
  Field f31(31);
  std::vector<FieldElement> received{f31.element(7), f31.element(8)};
  CHECK(source_accumulate(f31.element(5), received, 2, f31) == f31.element(20));
}

TEST_CASE("accumulate flags missing peers") {
  Field f;
  std::vector<FieldElement> none;
  try {
    source_accumulate(f.element(8), none, 0, f);
    FAIL("expected MissingShares");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingShares);
  }
  std::vector<FieldElement> one{f.element(1)};
  try {
    source_accumulate(f.element(8), one, 3, f);
    FAIL("expected MissingShares");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingShares);
    CHECK(std::string(e.what()).find("2 of 3") != std::string::npos);
  }
}

TEST_CASE("partial sums of a full exchange add up to the plaintext sum") {
  // Brute-force oracle: run the whole re-sharing matrix in the clear and
  // compare against the field total of the inputs.
  Field f;
  Mt19937Random rng(14);
  for (int round = 0; round < 100; ++round) {
    std::size_t n = 2 + rng.uniform(7);
    std::vector<PartyId> ids;
    for (std::size_t p = 0; p < n; ++p) ids.push_back("s" + std::to_string(p));
    SessionSpec spec = small_spec(ids, AggregateKind::Sum, {});

    std::vector<FieldElement> inputs;
    FieldElement plain_total = f.zero();
    for (std::size_t p = 0; p < n; ++p) {
      inputs.push_back(f.sample(rng));
      plain_total = f.add(plain_total, inputs.back());
    }

    std::map<PartyId, std::map<PartyId, FieldElement>> outbox;
    for (std::size_t p = 0; p < n; ++p) {
      outbox[ids[p]] = source_prepare_shares(inputs[p], spec, ids[p], rng, f);
    }

    FieldElement total = f.zero();
    for (const auto& id : ids) {
      std::vector<FieldElement> received;
      for (const auto& other : ids) {
        if (other != id) received.push_back(outbox[other].at(id));
      }
      total = f.add(total,
                    source_accumulate(outbox[id].at(id), received, n - 1, f));
    }
    CHECK(total == plain_total);
  }
}

TEST_CASE("combine reduces partials per the aggregate kind") {
  Field f31(31);
  SessionSpec spec = small_spec({"A", "B", "C"}, AggregateKind::Sum, {0, 15});
  std::map<PartyId, FieldElement> partials{
      {"A", f31.element(10)}, {"B", f31.element(20)}, {"C", f31.element(3)}};

  AggregateResult sum = gateway_combine(partials, spec, f31);
  CHECK(sum.value == 2.0);  // 33 mod 31, integer codec
  CHECK(sum.contributors == 3);

  spec.protocol_id = AggregateKind::Count;
  AggregateResult count = gateway_combine(partials, spec, f31);
  CHECK(count.value == 3.0);
  CHECK(count.contributors == 3);
}

TEST_CASE("combine averages exactly at sixteen fraction bits") {
  // Plaintext mean oracle over the full protocol route.
  Field f;
  FixedPointCodec codec;
  Mt19937Random rng(15);
  std::vector<PartyId> ids{"A", "B", "C"};
  SessionSpec spec = small_spec(ids, AggregateKind::Average, codec);

  std::vector<double> readings{1.0, 2.0, 4.5};
  std::map<PartyId, std::map<PartyId, FieldElement>> outbox;
  for (std::size_t p = 0; p < ids.size(); ++p) {
    outbox[ids[p]] = source_prepare_shares(
        encode_fixed(readings[p], codec, f), spec, ids[p], rng, f);
  }
  std::map<PartyId, FieldElement> partials;
  for (const auto& id : ids) {
    std::vector<FieldElement> received;
    for (const auto& other : ids) {
      if (other != id) received.push_back(outbox[other].at(id));
    }
    partials[id] = source_accumulate(outbox[id].at(id), received, 2, f);
  }
  AggregateResult avg = gateway_combine(partials, spec, f);
  CHECK(avg.value == 2.5);
  CHECK(avg.contributors == 3);
}

TEST_CASE("combine demands a partial from every participant") {
  Field f;
  SessionSpec spec = small_spec({"A", "B", "C"}, AggregateKind::Sum, {});
  std::map<PartyId, FieldElement> partials{{"A", f.element(1)},
                                           {"B", f.element(2)}};
  try {
    gateway_combine(partials, spec, f);
    FAIL("expected IncompletePartials");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompletePartials);
  }
  partials["C"] = f.element(3);
  partials["D"] = f.element(4);
  CHECK_THROWS_AS(gateway_combine(partials, spec, f), Error);
}

TEST_CASE("combine propagates decode overflow") {
  Field f;
  FixedPointCodec narrow{16, 1 << 10};
  SessionSpec spec = small_spec({"A", "B"}, AggregateKind::Sum, narrow);
  std::uint64_t bound =
      (narrow.half_range << narrow.fraction_bits) * kMaxAggregationParticipants;
  std::map<PartyId, FieldElement> partials{{"A", f.element(bound)},
                                           {"B", f.element(1)}};
  try {
    gateway_combine(partials, spec, f);
    FAIL("expected DecodeOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DecodeOverflow);
  }
}

TEST_CASE("messages round trip for every kind") {
  for (int k = 0; k < 14; ++k) {
    ProtocolMessage m;
    m.kind = static_cast<MessageKind>(k);
    m.session_id = "sess-" + std::to_string(k);
    m.sender = "node-" + std::to_string(k);
    m.payload = {{"x", k}, {"tag", "v"}};
    CHECK(decode_message(encode_message(m)) == m);
  }
}

TEST_CASE("the heartbeat wire fixture is frozen byte for byte") {
  // Matches the example frame in docs/wire.md; changing the canonical
  // encoding breaks stored transcripts and must fail here first.
  ProtocolMessage hb;
  hb.kind = MessageKind::Heartbeat;
  hb.sender = "meter-7";
  CHECK(encode_message(hb) ==
        "{\"kind\":\"Heartbeat\",\"payload\":{},\"sender\":\"meter-7\","
        "\"session_id\":\"\"}\n");

  ProtocolMessage share;
  share.kind = MessageKind::ShareTransfer;
  share.session_id = "display-1/q1/a0";
  share.sender = "meter-3";
  share.payload = {{"share", "123456789"}};
  CHECK(encode_message(share) ==
        "{\"kind\":\"ShareTransfer\",\"payload\":{\"share\":\"123456789\"},"
        "\"sender\":\"meter-3\",\"session_id\":\"display-1/q1/a0\"}\n");
}

TEST_CASE("malformed frames are rejected with the right code") {
  auto code_of = [](const std::string& frame) {
    try {
      decode_message(frame);
      return ErrorCode::ConfigError;  // not expected
    } catch (const Error& e) {
      return e.code();
    }
  };
  CHECK(code_of("") == ErrorCode::MalformedFrame);
  CHECK(code_of("{\"kind\":\"Heartbeat\"") == ErrorCode::MalformedFrame);
  CHECK(code_of("[1,2]") == ErrorCode::MalformedFrame);
  CHECK(code_of("{\"kind\":\"Heartbeat\",\"payload\":{},\"sender\":\"x\"}") ==
        ErrorCode::MalformedFrame);
  CHECK(code_of("{\"kind\":\"Heartbeat\",\"payload\":[],\"sender\":\"x\","
                "\"session_id\":\"\"}") == ErrorCode::MalformedFrame);
  CHECK(code_of("{\"kind\":\"Nope\",\"payload\":{},\"sender\":\"x\","
                "\"session_id\":\"\"}") == ErrorCode::UnknownKind);
  CHECK(code_of("{\"extra\":1,\"kind\":\"Heartbeat\",\"payload\":{},"
                "\"sender\":\"x\",\"session_id\":\"\"}") ==
        ErrorCode::MalformedFrame);
}

TEST_CASE("the session phase graph admits exactly the specified moves") {
  using P = SessionPhase;
  auto legal = [](P a, P b) { return SessionState::legal_transition(a, b); };

  CHECK(legal(P::Planned, P::Announced));
  CHECK(legal(P::Announced, P::Committed));
  CHECK(legal(P::Committed, P::Exchanging));
  CHECK(legal(P::Exchanging, P::Combining));
  CHECK(legal(P::Combining, P::Completed));
  CHECK(legal(P::Announced, P::Restarting));
  CHECK(legal(P::Committed, P::Restarting));
  CHECK(legal(P::Exchanging, P::Restarting));
  CHECK(legal(P::Restarting, P::Announced));
  for (P from : {P::Planned, P::Announced, P::Committed, P::Exchanging,
                 P::Combining, P::Completed, P::Aborted, P::Restarting}) {
    CHECK(legal(from, P::Aborted));
  }

  CHECK_FALSE(legal(P::Planned, P::Exchanging));
  CHECK_FALSE(legal(P::Planned, P::Restarting));
  CHECK_FALSE(legal(P::Combining, P::Restarting));
  CHECK_FALSE(legal(P::Completed, P::Announced));
  CHECK_FALSE(legal(P::Aborted, P::Announced));
  CHECK_FALSE(legal(P::Exchanging, P::Completed));
}

TEST_CASE("random transition walks agree with the legality table") {
  using P = SessionPhase;
  const P phases[] = {P::Planned,   P::Announced, P::Committed, P::Exchanging,
                      P::Combining, P::Completed, P::Aborted,   P::Restarting};
  Mt19937Random rng(16);
  for (int walk = 0; walk < 500; ++walk) {
    SessionState state(0);  // zero participants: partials trivially complete
    for (int step = 0; step < 20; ++step) {
      P target = phases[rng.uniform(8)];
      bool expect = SessionState::legal_transition(state.phase(), target);
      bool moved = true;
      try {
        state.advance(target);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IllegalTransition);
        moved = false;
      }
      CHECK(moved == expect);
    }
  }
}

TEST_CASE("completion requires a full partials map") {
  Field f;
  SessionState state(2);
  state.advance(SessionPhase::Announced);
  state.record_commit("A");
  state.record_commit("B");
  CHECK(state.all_committed());
  state.advance(SessionPhase::Committed);
  state.advance(SessionPhase::Exchanging);
  state.record_partial("A", f.element(1));
  state.advance(SessionPhase::Combining);
  CHECK_THROWS_AS(state.advance(SessionPhase::Completed), Error);
}

TEST_CASE("gateway views are identical for equal-sum inputs at p=5") {
  // The view-indistinguishability oracle: exhaustive over all randomness of
  // three sources, the multiset of (partial_A, partial_B, partial_C) triples
  // the gateway sees must not depend on which equal-sum inputs were used.
  Field f5(5);
  std::vector<PartyId> ids{"A", "B", "C"};
  SessionSpec spec = small_spec(ids, AggregateKind::Sum, {0, 1});
  const std::vector<std::vector<std::uint64_t>> input_sets = {
      {1, 3, 0}, {4, 0, 0}};  // both sum to 4

  std::vector<std::map<std::vector<std::uint64_t>, int>> views;
  for (const auto& inputs : input_sets) {
    std::map<std::vector<std::uint64_t>, int> multiset;
    for (std::uint64_t index = 0; index < 5 * 5 * 5 * 5 * 5 * 5; ++index) {
      std::uint64_t rest = index;
      std::map<PartyId, std::map<PartyId, FieldElement>> outbox;
      for (std::size_t p = 0; p < 3; ++p) {
        std::vector<std::uint64_t> draws{rest % 5, (rest / 5) % 5};
        rest /= 25;
        ScriptedRandom rng(draws);
        outbox[ids[p]] = source_prepare_shares(f5.element(inputs[p]), spec,
                                               ids[p], rng, f5);
      }
      std::vector<std::uint64_t> view;
      for (const auto& id : ids) {
        std::vector<FieldElement> received;
        for (const auto& other : ids) {
          if (other != id) received.push_back(outbox[other].at(id));
        }
        view.push_back(
            source_accumulate(outbox[id].at(id), received, 2, f5).value());
      }
      multiset[view]++;
    }
    views.push_back(std::move(multiset));
  }
  CHECK(views[0] == views[1]);
}
