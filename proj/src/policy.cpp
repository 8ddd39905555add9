#include "smcgate/policy.hpp"

#include <fnmatch.h>

#include <string>

namespace smcgate {

bool glob_match(std::string_view pattern, std::string_view text) {
  return fnmatch(std::string(pattern).c_str(), std::string(text).c_str(), 0) == 0;
}

PolicyDecision evaluate_policy(const SourcePolicy& policy,
                               std::string_view consumer,
                               std::string_view purpose,
                               std::string_view data_type) {
  for (std::size_t i = 0; i < policy.rules.size(); ++i) {
    const PolicyRule& rule = policy.rules[i];
    if (glob_match(rule.consumer, consumer) &&
        glob_match(rule.purpose, purpose) &&
        glob_match(rule.data_type, data_type)) {
      if (rule.allow) return {true, "rule " + std::to_string(i)};
      return {false, "denied by rule " + std::to_string(i)};
    }
  }
  if (policy.default_allow) return {true, "default allow"};
  return {false, "default deny"};
}

}  // namespace smcgate
