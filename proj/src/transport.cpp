#include "smcgate/transport.hpp"

#include <sstream>

#include "smcgate/auth.hpp"

namespace smcgate {

std::string Transcript::serialize() const {
  std::ostringstream out;
  for (const auto& e : entries_) {
    out << canonical_dump(Json{
               {"disposition", e.delivered ? "delivered" : "dropped"},
               {"frame", e.frame},
               {"from", e.from},
               {"time_ms", e.time_ms},
               {"to", e.to},
           })
        << "\n";
  }
  return out.str();
}

Transcript Transcript::parse(std::string_view text) {
  Transcript t;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::MalformedFrame, "bad transcript line: " + line);
    }
    try {
      TranscriptEntry e;
      e.time_ms = j.at("time_ms").get<TimeMs>();
      e.from = j.at("from").get<std::string>();
      e.to = j.at("to").get<std::string>();
      e.frame = j.at("frame").get<std::string>();
      e.delivered = j.at("disposition").get<std::string>() == "delivered";
      t.record(std::move(e));
    } catch (const Json::exception& err) {
      throw Error(ErrorCode::MalformedFrame,
                  std::string("bad transcript line: ") + err.what());
    }
  }
  return t;
}

std::string Transcript::hash() const { return sha256_hex(serialize()); }

}  // namespace smcgate
