#pragma once

#include <stdexcept>
#include <string>

namespace smcgate {

enum class ErrorCode {
  OutOfRange,
  DecodeOverflow,
  EmptyParticipants,
  EmptyShares,
  NotParticipant,
  MissingShares,
  IncompletePartials,
  MalformedFrame,
  UnknownKind,
  UnknownNode,
  IllegalTransition,
  MalformedRequest,
  NoLocalData,
  PeerTimeout,
  SetupTimeout,
  ConfigError,
};

const char* to_string(ErrorCode code);

/// Library-level failure. Wire-visible request errors (AuthFailed,
/// AccessDenied, ...) are structured values, not exceptions; see gateway_node.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DecodeOverflow: return "DecodeOverflow";
    case ErrorCode::EmptyParticipants: return "EmptyParticipants";
    case ErrorCode::EmptyShares: return "EmptyShares";
    case ErrorCode::NotParticipant: return "NotParticipant";
    case ErrorCode::MissingShares: return "MissingShares";
    case ErrorCode::IncompletePartials: return "IncompletePartials";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::MalformedRequest: return "MalformedRequest";
    case ErrorCode::NoLocalData: return "NoLocalData";
    case ErrorCode::PeerTimeout: return "PeerTimeout";
    case ErrorCode::SetupTimeout: return "SetupTimeout";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace smcgate
