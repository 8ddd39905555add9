#include "smcgate/verify.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "smcgate/transparency.hpp"

namespace smcgate {

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string VerificationReport::to_text() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.passed) out << " (" << c.violations.size() << " violation(s))";
    out << "\n";
    std::size_t shown = 0;
    for (const auto& v : c.violations) {
      if (shown++ == 5) {
        out << "    ...\n";
        break;
      }
      out << "    " << v << "\n";
    }
  }
  out << "transcript_sha256 " << transcript_hash << "\n";
  return out.str();
}

namespace {

bool payload_contains_value(const Json& node, const std::string& decimal) {
  if (node.is_string()) return node.get<std::string>() == decimal;
  if (node.is_number_unsigned()) {
    return std::to_string(node.get<std::uint64_t>()) == decimal;
  }
  if (node.is_object() || node.is_array()) {
    for (const auto& child : node) {
      if (payload_contains_value(child, decimal)) return true;
    }
  }
  return false;
}

struct ParsedEntry {
  const TranscriptEntry* entry;
  std::size_t index;
  ProtocolMessage message;
};

}  // namespace

VerificationReport verify_run(const Scenario& scenario,
                              const Transcript& transcript,
                              const std::map<NodeId, std::string>& logs) {
  const NodeId& gateway = scenario.gateway_id;
  Field field(scenario.params.field_modulus);
  FixedPointCodec codec{scenario.params.fraction_bits,
                        scenario.params.half_range};

  std::vector<ParsedEntry> parsed;
  parsed.reserve(transcript.size());
  for (std::size_t i = 0; i < transcript.entries().size(); ++i) {
    const TranscriptEntry& e = transcript.entries()[i];
    try {
      parsed.push_back({&e, i, decode_message(e.frame)});
    } catch (const Error&) {
      // Unparseable frames cannot carry protocol payloads; skip.
    }
  }

  VerificationReport report;
  report.transcript_hash = transcript.hash();

  // Blindness: no encoded scripted reading in any gateway-bound payload.
  CheckResult blindness{"blindness"};
  std::set<std::string> encodings;
  for (const auto& src : scenario.sources) {
    for (const auto& r : src.readings) {
      encodings.insert(to_decimal(encode_fixed(r.value, codec, field)));
    }
  }
  for (const auto& p : parsed) {
    if (p.entry->to != gateway) continue;
    for (const auto& enc : encodings) {
      if (payload_contains_value(p.message.payload, enc)) {
        blindness.passed = false;
        blindness.violations.push_back(
            "frame " + std::to_string(p.index) + " from " + p.entry->from +
            " carries encoded reading " + enc);
      }
    }
  }
  report.checks.push_back(std::move(blindness));

  // Share routing: ShareTransfer frames never target the gateway.
  CheckResult routing{"share_routing"};
  for (const auto& p : parsed) {
    if (p.message.kind == MessageKind::ShareTransfer && p.entry->to == gateway) {
      routing.passed = false;
      routing.violations.push_back("frame " + std::to_string(p.index) +
                                   " is a ShareTransfer to the gateway");
    }
  }
  report.checks.push_back(std::move(routing));

  // Transparency completeness: one record per contacted source per session,
  // carrying the byte-identical original request.
  CheckResult transparency{"transparency_completeness"};
  struct AnnouncedSession {
    std::string original_request;
    std::set<NodeId> contacted;  // sources the announce actually reached
  };
  std::map<std::string, AnnouncedSession> announced;
  for (const auto& p : parsed) {
    if (p.message.kind != MessageKind::Announce || p.entry->from != gateway) {
      continue;
    }
    if (!p.message.payload.contains("spec")) continue;
    SessionSpec spec;
    try {
      spec = SessionSpec::from_json(p.message.payload.at("spec"));
    } catch (const Error&) {
      continue;
    }
    auto& session = announced[spec.session_id];
    session.original_request = spec.original_request;
    if (p.entry->delivered) session.contacted.insert(p.entry->to);
  }
  std::map<NodeId, std::vector<TransparencyRecord>> parsed_logs;
  for (const auto& [node, text] : logs) {
    try {
      parsed_logs[node] = TransparencyLog::parse(text).records();
    } catch (const Error& e) {
      transparency.passed = false;
      transparency.violations.push_back(node + ": unreadable log (" +
                                        e.what() + ")");
    }
  }
  for (const auto& [sid, session] : announced) {
    for (const NodeId& source : session.contacted) {
      const auto log_it = parsed_logs.find(source);
      std::size_t matching = 0;
      bool bytes_ok = true;
      if (log_it != parsed_logs.end()) {
        for (const auto& record : log_it->second) {
          if (record.session_id != sid) continue;
          ++matching;
          if (record.original_request != session.original_request) {
            bytes_ok = false;
          }
        }
      }
      if (matching != 1 || !bytes_ok) {
        transparency.passed = false;
        transparency.violations.push_back(
            source + ": session " + sid + " has " + std::to_string(matching) +
            " record(s)" + (bytes_ok ? "" : " with mismatched request bytes"));
      }
    }
  }
  report.checks.push_back(std::move(transparency));

  // Fail-closed ordering: a request rejected at auth or ACL never reached
  // session planning, so no announce may reference it.
  CheckResult fail_closed{"fail_closed"};
  std::set<std::pair<std::string, std::string>> rejected;  // (consumer, request)
  for (const auto& p : parsed) {
    if (p.message.kind != MessageKind::Result || p.entry->from != gateway) {
      continue;
    }
    const Json& payload = p.message.payload;
    if (payload.value("outcome", "") != "error") continue;
    const std::string code = payload.value("code", "");
    if (code == "AuthFailed" || code == "AccessDenied") {
      rejected.insert({p.entry->to, payload.value("request_id", "")});
    }
  }
  for (const auto& [sid, session] : announced) {
    DataRequest req;
    try {
      req = DataRequest::parse(session.original_request);
    } catch (const Error&) {
      continue;
    }
    if (rejected.count({req.consumer_id, req.request_id})) {
      fail_closed.passed = false;
      fail_closed.violations.push_back(
          "session " + sid + " announced for rejected request " +
          req.consumer_id + "/" + req.request_id);
    }
  }
  report.checks.push_back(std::move(fail_closed));

  return report;
}

}  // namespace smcgate
