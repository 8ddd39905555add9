#include "smcgate/sharing.hpp"

#include <set>

namespace smcgate {

ShareVector share_additive(FieldElement secret,
                           std::span<const PartyId> party_ids,
                           RandomSource& rng, const Field& field) {
  if (party_ids.empty()) {
    throw Error(ErrorCode::EmptyParticipants, "cannot share among zero parties");
  }
  std::set<PartyId> seen(party_ids.begin(), party_ids.end());
  if (seen.size() != party_ids.size()) {
    throw Error(ErrorCode::ConfigError, "party ids must be distinct");
  }

  ShareVector out;
  out.shares.reserve(party_ids.size());
  FieldElement running = field.zero();
  for (std::size_t i = 0; i + 1 < party_ids.size(); ++i) {
    FieldElement r = field.sample(rng);
    running = field.add(running, r);
    out.shares.emplace_back(party_ids[i], r);
  }
  out.shares.emplace_back(party_ids.back(), field.sub(secret, running));
  return out;
}

FieldElement reconstruct_additive(const ShareVector& shares,
                                  const Field& field) {
  if (shares.shares.empty()) {
    throw Error(ErrorCode::EmptyShares, "cannot reconstruct from zero shares");
  }
  FieldElement sum = field.zero();
  for (const auto& [party, value] : shares.shares) {
    sum = field.add(sum, value);
  }
  return sum;
}

}  // namespace smcgate
