#pragma once

#include <set>
#include <string>
#include <tuple>

#include "smcgate/message.hpp"
#include "smcgate/session.hpp"

namespace smcgate {

/// An authenticated consumer request. The auth tag covers the canonical
/// serialization of every other field, so any byte change invalidates it.
struct DataRequest {
  std::string request_id;
  std::string consumer_id;
  std::string purpose;
  AggregateKind aggregate = AggregateKind::Sum;
  std::string data_type;
  std::string scope;
  TimeWindow window;
  std::string auth_tag;

  /// Canonical bytes the tag is computed over (all fields except the tag).
  std::string canonical_body() const;

  /// Canonical bytes of the full request including the tag; this is what a
  /// consumer puts on the wire and what sessions embed verbatim.
  std::string canonical_bytes() const;

  void sign(std::string_view key);
  bool verify(std::string_view key) const;

  Json to_json() const;
  static DataRequest from_json(const Json& j);  // throws MalformedRequest
  static DataRequest parse(std::string_view bytes);

  friend bool operator==(const DataRequest&, const DataRequest&) = default;
};

struct Grant {
  std::string consumer_id;
  std::string data_type;
  AggregateKind aggregate = AggregateKind::Sum;
  std::string purpose;

  friend auto operator<=>(const Grant& a, const Grant& b) {
    return std::tie(a.consumer_id, a.data_type, a.aggregate, a.purpose) <=>
           std::tie(b.consumer_id, b.data_type, b.aggregate, b.purpose);
  }
  friend bool operator==(const Grant&, const Grant&) = default;
};

/// A request is admissible iff its exact tuple is granted.
class AccessControlList {
 public:
  AccessControlList() = default;
  explicit AccessControlList(std::set<Grant> grants)
      : grants_(std::move(grants)) {}

  void add(Grant grant) { grants_.insert(std::move(grant)); }

  bool admits(const DataRequest& req) const {
    return grants_.count(
               {req.consumer_id, req.data_type, req.aggregate, req.purpose}) > 0;
  }

  std::size_t size() const { return grants_.size(); }

  /// Newline-delimited canonical records, one grant per line.
  std::string serialize() const;
  static AccessControlList parse(std::string_view text);

 private:
  std::set<Grant> grants_;
};

}  // namespace smcgate
