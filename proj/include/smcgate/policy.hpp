#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace smcgate {

/// Glob match with `*` and `?`, the whole text must match.
bool glob_match(std::string_view pattern, std::string_view text);

struct PolicyRule {
  std::string consumer;
  std::string purpose;
  std::string data_type;
  bool allow = false;

  friend bool operator==(const PolicyRule&, const PolicyRule&) = default;
};

/// Ordered first-match-wins rules; deterministic by construction, so the
/// same request always gets the same answer.
struct SourcePolicy {
  std::vector<PolicyRule> rules;
  bool default_allow = false;

  friend bool operator==(const SourcePolicy&, const SourcePolicy&) = default;
};

struct PolicyDecision {
  bool commit = false;
  std::string reason;
};

PolicyDecision evaluate_policy(const SourcePolicy& policy,
                               std::string_view consumer,
                               std::string_view purpose,
                               std::string_view data_type);

}  // namespace smcgate
