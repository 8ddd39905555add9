#pragma once

#include <string>
#include <string_view>

namespace smcgate {

/// Keyed integrity tag for consumer requests: lowercase hex of
/// HMAC-SHA256(key, data). Keys are per-consumer pre-shared strings
/// registered at the gateway; asymmetric schemes can slot in behind the
/// same tag field.
std::string hmac_sha256_hex(std::string_view key, std::string_view data);

std::string sha256_hex(std::string_view data);

}  // namespace smcgate
