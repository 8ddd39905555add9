#pragma once

#include <map>
#include <span>

#include "smcgate/session.hpp"

namespace smcgate {

/// One round of additive re-sharing: the caller splits its encoded reading
/// across all participants (itself included). It keeps its own entry and
/// sends the rest as ShareTransfer frames, source to source.
std::map<PartyId, FieldElement> source_prepare_shares(FieldElement value,
                                                      const SessionSpec& spec,
                                                      const PartyId& self,
                                                      RandomSource& rng,
                                                      const Field& field);

/// Folds the caller's own share with the shares received from every other
/// participant; the result is its PartialSum payload. A short count signals
/// a peer failure and is surfaced as MissingShares for recovery upstream.
FieldElement source_accumulate(FieldElement own_share,
                               std::span<const FieldElement> received,
                               std::size_t expected_peers, const Field& field);

/// Combines the complete partial-sum map into the consumer-facing aggregate.
/// Sum and average decode through the codec; count never touches field math.
AggregateResult gateway_combine(const std::map<PartyId, FieldElement>& partials,
                                const SessionSpec& spec, const Field& field);

}  // namespace smcgate
