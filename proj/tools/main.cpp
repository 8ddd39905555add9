// Scenario runner and transcript verifier for the SMC gateway testbed.
//
//   smcgate --scenario scenarios/smoke.json --out out/
//   smcgate --scenario scenarios/smoke.json --verify-only out/transcript.ndjson
//
// Exit code 0 iff every built-in invariant check passes.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "smcgate/runner.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw smcgate::Error(smcgate::ErrorCode::ConfigError,
                         path.string() + ": cannot open");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int verify_only(const smcgate::Scenario& scenario,
                const std::string& transcript_path) {
  smcgate::Transcript transcript =
      smcgate::Transcript::parse(read_file(transcript_path));

  // Transparency logs live next to the transcript, under logs/.
  std::map<smcgate::NodeId, std::string> logs;
  fs::path logs_dir = fs::path(transcript_path).parent_path() / "logs";
  if (fs::exists(logs_dir)) {
    for (const auto& entry : fs::directory_iterator(logs_dir)) {
      if (entry.path().extension() != ".ndjson") continue;
      logs[entry.path().stem().string()] = read_file(entry.path());
    }
  }

  smcgate::VerificationReport report =
      smcgate::verify_run(scenario, transcript, logs);
  std::cout << report.to_text();
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SMC gateway scenario runner"};

  std::string scenario_path;
  std::string transport;
  std::string out_dir = "out";
  std::string verify_path;
  std::uint64_t seed = 0;
  bool seed_set = false;

  app.add_option("--scenario", scenario_path, "Scenario file")->required();
  app.add_option("--transport", transport, "Override transport: sim|socket");
  app.add_option("--seed", seed, "Override the scenario seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--out", out_dir, "Artifact output directory");
  app.add_option("--verify-only", verify_path,
                 "Verify an existing transcript instead of running");

  CLI11_PARSE(app, argc, argv);

  try {
    smcgate::Scenario scenario = smcgate::Scenario::load(scenario_path);
    if (!transport.empty()) {
      scenario.transport = smcgate::transport_from_string(transport);
    }
    if (seed_set) scenario.seed = seed;

    if (!verify_path.empty()) {
      return verify_only(scenario, verify_path);
    }

    smcgate::RunArtifacts artifacts = smcgate::run_scenario(scenario);
    smcgate::write_artifacts(artifacts, out_dir);

    for (const auto& r : artifacts.results) {
      std::cout << r.consumer << "/" << r.request_id << ": ";
      if (!r.responded) {
        std::cout << "unresolved";
      } else if (r.ok) {
        std::cout << "ok value=" << r.value << " contributors=" << r.contributors;
      } else {
        std::cout << "error " << r.error_code << " (" << r.detail << ")";
      }
      if (r.restarts > 0) std::cout << " restarts=" << r.restarts;
      std::cout << "\n";
    }
    std::cout << artifacts.report.to_text();
    std::cout << "artifacts written to " << out_dir << "\n";
    return artifacts.checks_passed() ? 0 : 1;
  } catch (const smcgate::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
