#include "smcgate/transparency.hpp"

#include <map>
#include <sstream>

namespace smcgate {

void TransparencyLog::append(TransparencyRecord record) {
  if (has_record(record.session_id)) {
    throw Error(ErrorCode::ConfigError,
                "session already recorded: " + record.session_id);
  }
  Line line;
  line.is_decision = true;
  line.session_id = record.session_id;
  line.timestamp_ms = record.timestamp_ms;
  line.record = std::move(record);
  lines_.push_back(std::move(line));
}

void TransparencyLog::mark_delivered(const std::string& session_id,
                                     std::int64_t timestamp_ms) {
  if (!has_record(session_id)) {
    throw Error(ErrorCode::ConfigError,
                "delivery mark without decision: " + session_id);
  }
  Line line;
  line.is_decision = false;
  line.session_id = session_id;
  line.timestamp_ms = timestamp_ms;
  lines_.push_back(std::move(line));
}

bool TransparencyLog::has_record(const std::string& session_id) const {
  for (const auto& line : lines_) {
    if (line.is_decision && line.record.session_id == session_id) return true;
  }
  return false;
}

std::vector<TransparencyRecord> TransparencyLog::records() const {
  std::vector<TransparencyRecord> out;
  std::map<std::string, std::size_t> index;
  for (const auto& line : lines_) {
    if (line.is_decision) {
      index[line.record.session_id] = out.size();
      out.push_back(line.record);
    } else {
      out[index.at(line.session_id)].result_delivered = true;
    }
  }
  return out;
}

std::string TransparencyLog::serialize() const {
  std::ostringstream text;
  for (const auto& line : lines_) {
    if (line.is_decision) {
      const TransparencyRecord& r = line.record;
      text << canonical_dump(Json{
                  {"consumer_id", r.consumer_id},
                  {"decision", r.contributed ? "contributed" : "vetoed"},
                  {"original_request", r.original_request},
                  {"result_delivered", r.result_delivered},
                  {"session_id", r.session_id},
                  {"timestamp_ms", r.timestamp_ms},
                  {"type", "decision"},
              })
           << "\n";
    } else {
      text << canonical_dump(Json{{"session_id", line.session_id},
                                  {"timestamp_ms", line.timestamp_ms},
                                  {"type", "delivery"}})
           << "\n";
    }
  }
  return text.str();
}

TransparencyLog TransparencyLog::parse(std::string_view text) {
  TransparencyLog log;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    if (raw.empty()) continue;
    Json j = Json::parse(raw, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("type")) {
      throw Error(ErrorCode::ConfigError, "bad transparency line: " + raw);
    }
    try {
      if (j.at("type") == "decision") {
        TransparencyRecord r;
        r.consumer_id = j.at("consumer_id").get<std::string>();
        r.contributed = j.at("decision").get<std::string>() == "contributed";
        r.original_request = j.at("original_request").get<std::string>();
        r.session_id = j.at("session_id").get<std::string>();
        r.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
        log.append(std::move(r));
      } else if (j.at("type") == "delivery") {
        log.mark_delivered(j.at("session_id").get<std::string>(),
                           j.at("timestamp_ms").get<std::int64_t>());
      } else {
        throw Error(ErrorCode::ConfigError, "bad transparency line: " + raw);
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ConfigError,
                  std::string("bad transparency line: ") + e.what());
    }
  }
  return log;
}

}  // namespace smcgate
