#include "smcgate/message.hpp"

#include <array>

namespace smcgate {

namespace {

constexpr std::array<const char*, 14> kKindNames = {
    "DiscoveryAnnounce", "SetupMetadata", "Heartbeat",        "Announce",
    "Commit",            "Veto",          "ShareTransfer",    "PartialSum",
    "Result",            "Abort",         "Request",          "DirectoryQuery",
    "DirectoryListing",  "ReloadControl",
};

}  // namespace

const char* to_string(MessageKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

MessageKind message_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (name == kKindNames[i]) return static_cast<MessageKind>(i);
  }
  throw Error(ErrorCode::UnknownKind, std::string(name));
}

std::string canonical_dump(const Json& value) {
  // nlohmann keeps object keys in std::map order, so dump() is already
  // sorted-key and compact.
  return value.dump();
}

std::string encode_message(const ProtocolMessage& m) {
  Json frame = {
      {"kind", to_string(m.kind)},
      {"payload", m.payload},
      {"sender", m.sender},
      {"session_id", m.session_id},
  };
  return canonical_dump(frame) + "\n";
}

ProtocolMessage decode_message(std::string_view frame) {
  while (!frame.empty() && (frame.back() == '\n' || frame.back() == '\r')) {
    frame.remove_suffix(1);
  }
  Json parsed = Json::parse(frame, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::MalformedFrame, "frame is not a JSON object");
  }
  if (parsed.size() != 4 || !parsed.contains("kind") ||
      !parsed.contains("payload") || !parsed.contains("sender") ||
      !parsed.contains("session_id")) {
    throw Error(ErrorCode::MalformedFrame, "frame must carry exactly kind/payload/sender/session_id");
  }
  if (!parsed["kind"].is_string() || !parsed["sender"].is_string() ||
      !parsed["session_id"].is_string() || !parsed["payload"].is_object()) {
    throw Error(ErrorCode::MalformedFrame, "frame field has wrong type");
  }
  ProtocolMessage m;
  m.kind = message_kind_from_string(parsed["kind"].get<std::string>());
  m.session_id = parsed["session_id"].get<std::string>();
  m.sender = parsed["sender"].get<std::string>();
  m.payload = parsed["payload"];
  return m;
}

}  // namespace smcgate
