#include "smcgate/protocol.hpp"

#include <string>

namespace smcgate {

std::map<PartyId, FieldElement> source_prepare_shares(FieldElement value,
                                                      const SessionSpec& spec,
                                                      const PartyId& self,
                                                      RandomSource& rng,
                                                      const Field& field) {
  if (!spec.has_participant(self)) {
    throw Error(ErrorCode::NotParticipant,
                self + " is not in session " + spec.session_id);
  }
  auto ids = spec.party_ids();
  ShareVector shared = share_additive(value, ids, rng, field);
  std::map<PartyId, FieldElement> out;
  for (const auto& [party, share] : shared.shares) {
    out.emplace(party, share);
  }
  return out;
}

FieldElement source_accumulate(FieldElement own_share,
                               std::span<const FieldElement> received,
                               std::size_t expected_peers, const Field& field) {
  if (expected_peers == 0) {
    // A one-party session is forbidden upstream; surface the degenerate
    // call the same way as a missing peer.
    throw Error(ErrorCode::MissingShares, "1 share missing (no peers)");
  }
  if (received.size() != expected_peers) {
    std::size_t missing =
        received.size() < expected_peers ? expected_peers - received.size() : 0;
    throw Error(ErrorCode::MissingShares,
                std::to_string(missing) + " of " +
                    std::to_string(expected_peers) + " peer shares missing");
  }
  FieldElement sum = own_share;
  for (FieldElement share : received) {
    sum = field.add(sum, share);
  }
  return sum;
}

AggregateResult gateway_combine(const std::map<PartyId, FieldElement>& partials,
                                const SessionSpec& spec, const Field& field) {
  for (const auto& p : spec.participants) {
    if (!partials.count(p.party_id)) {
      throw Error(ErrorCode::IncompletePartials,
                  "no partial sum from " + p.party_id);
    }
  }
  if (partials.size() != spec.participants.size()) {
    throw Error(ErrorCode::IncompletePartials,
                "partial sums from non-participants");
  }

  int n = static_cast<int>(spec.participants.size());
  if (spec.protocol_id == AggregateKind::Count) {
    return {static_cast<double>(n), n};
  }

  FieldElement sum = field.zero();
  for (const auto& [party, value] : partials) {
    sum = field.add(sum, value);
  }
  double decoded = decode_fixed(sum, spec.codec, field);
  if (spec.protocol_id == AggregateKind::Average) {
    return {decoded / n, n};
  }
  return {decoded, n};
}

}  // namespace smcgate
