#pragma once

#include <map>
#include <string>
#include <vector>

#include "smcgate/scenario.hpp"
#include "smcgate/transport.hpp"

namespace smcgate {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::vector<std::string> violations;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  std::string transcript_hash;

  bool all_passed() const;
  const CheckResult* find(const std::string& name) const;
  std::string to_text() const;
};

/// The operationalized protection goals, run over a finished transcript and
/// the per-source transparency logs. The CLI and the test suites call these
/// same functions, so the two cannot drift.
///
///   blindness               -- no scripted reading's field encoding occurs
///                              in any gateway-bound payload
///   share_routing           -- no ShareTransfer frame is addressed to the
///                              gateway
///   transparency_completeness -- every source an Announce reached holds
///                              exactly one record with the byte-identical
///                              original request
///   fail_closed             -- AuthFailed / AccessDenied requests never led
///                              to a session announce
VerificationReport verify_run(const Scenario& scenario,
                              const Transcript& transcript,
                              const std::map<NodeId, std::string>& logs);

}  // namespace smcgate
