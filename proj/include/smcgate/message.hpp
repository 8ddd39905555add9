#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "smcgate/errors.hpp"

namespace smcgate {

using Json = nlohmann::json;

/// Frame kinds. The session protocol uses DiscoveryAnnounce..Abort; the
/// consumer API and operator control reuse the same framing with the
/// remaining kinds. ShareTransfer frames travel source-to-source only and
/// never to the gateway; transcripts make that checkable.
enum class MessageKind {
  DiscoveryAnnounce,
  SetupMetadata,
  Heartbeat,
  Announce,
  Commit,
  Veto,
  ShareTransfer,
  PartialSum,
  Result,
  Abort,
  Request,
  DirectoryQuery,
  DirectoryListing,
  ReloadControl,
};

const char* to_string(MessageKind kind);
MessageKind message_kind_from_string(std::string_view name);

struct ProtocolMessage {
  MessageKind kind = MessageKind::Heartbeat;
  std::string session_id;
  std::string sender;
  Json payload = Json::object();

  friend bool operator==(const ProtocolMessage& a, const ProtocolMessage& b) {
    return a.kind == b.kind && a.session_id == b.session_id &&
           a.sender == b.sender && a.payload == b.payload;
  }
};

/// Canonical frame: single line of JSON with sorted keys plus a trailing
/// newline. Canonical form keeps authentication tags stable.
std::string encode_message(const ProtocolMessage& m);

/// Parses one complete frame (trailing newline optional).
/// Throws MalformedFrame / UnknownKind.
ProtocolMessage decode_message(std::string_view frame);

/// Sorted-key compact dump; the canonical byte form used everywhere a JSON
/// value crosses a wire or a file boundary.
std::string canonical_dump(const Json& value);

}  // namespace smcgate
