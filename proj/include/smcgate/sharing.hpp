#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smcgate/field.hpp"
#include "smcgate/rng.hpp"

namespace smcgate {

using PartyId = std::string;

/// Additive sharing of one secret: share values sum to the secret mod p.
struct ShareVector {
  std::vector<std::pair<PartyId, FieldElement>> shares;
};

/// Splits `secret` into |party_ids| summands: all but the last are uniform
/// field draws, the last absorbs the difference. Any proper subset of the
/// shares is distributed independently of the secret.
ShareVector share_additive(FieldElement secret,
                           std::span<const PartyId> party_ids,
                           RandomSource& rng, const Field& field);

FieldElement reconstruct_additive(const ShareVector& shares,
                                  const Field& field);

}  // namespace smcgate
