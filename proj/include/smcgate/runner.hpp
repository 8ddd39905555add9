#pragma once

#include <string>

#include "smcgate/scenario.hpp"
#include "smcgate/verify.hpp"

namespace smcgate {

struct RequestRecord {
  std::string consumer;
  std::string request_id;
  bool responded = false;
  bool ok = false;
  double value = 0.0;
  int contributors = 0;
  std::string error_code;
  std::string detail;
  TimeMs issued_at_ms = -1;
  TimeMs completed_at_ms = -1;
  int restarts = 0;

  Json to_json() const;
};

struct RunArtifacts {
  std::vector<RequestRecord> results;
  Transcript transcript;
  std::map<NodeId, std::string> transparency_logs;
  VerificationReport report;

  bool checks_passed() const { return report.all_passed(); }
  std::string results_ndjson() const;
};

/// Executes one scenario on its configured transport, collects results,
/// transcript and transparency logs, and runs the built-in invariant checks.
RunArtifacts run_scenario(const Scenario& scenario);

/// Writes transcript.ndjson, results.ndjson, report.txt and logs/<id>.ndjson
/// under out_dir (created if missing).
void write_artifacts(const RunArtifacts& artifacts, const std::string& out_dir);

}  // namespace smcgate
