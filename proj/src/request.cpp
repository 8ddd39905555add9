#include "smcgate/request.hpp"

#include <sstream>

#include "smcgate/auth.hpp"

namespace smcgate {

namespace {

Json request_fields(const DataRequest& r) {
  return Json{
      {"aggregate", to_string(r.aggregate)},
      {"consumer_id", r.consumer_id},
      {"data_type", r.data_type},
      {"purpose", r.purpose},
      {"request_id", r.request_id},
      {"scope", r.scope},
      {"window", {{"end_ms", r.window.end_ms}, {"start_ms", r.window.start_ms}}},
  };
}

}  // namespace

std::string DataRequest::canonical_body() const {
  return canonical_dump(request_fields(*this));
}

std::string DataRequest::canonical_bytes() const {
  return canonical_dump(to_json());
}

void DataRequest::sign(std::string_view key) {
  auth_tag = hmac_sha256_hex(key, canonical_body());
}

bool DataRequest::verify(std::string_view key) const {
  return auth_tag == hmac_sha256_hex(key, canonical_body());
}

Json DataRequest::to_json() const {
  Json j = request_fields(*this);
  j["auth_tag"] = auth_tag;
  return j;
}

DataRequest DataRequest::from_json(const Json& j) {
  try {
    DataRequest r;
    r.request_id = j.at("request_id").get<std::string>();
    r.consumer_id = j.at("consumer_id").get<std::string>();
    r.purpose = j.at("purpose").get<std::string>();
    r.aggregate = aggregate_from_string(j.at("aggregate").get<std::string>());
    r.data_type = j.at("data_type").get<std::string>();
    r.scope = j.at("scope").get<std::string>();
    r.window = {j.at("window").at("start_ms").get<std::int64_t>(),
                j.at("window").at("end_ms").get<std::int64_t>()};
    r.auth_tag = j.at("auth_tag").get<std::string>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedRequest, e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedRequest, e.what());
  }
}

DataRequest DataRequest::parse(std::string_view bytes) {
  Json parsed = Json::parse(bytes, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::MalformedRequest, "request is not a JSON object");
  }
  return from_json(parsed);
}

std::string AccessControlList::serialize() const {
  std::ostringstream out;
  for (const auto& g : grants_) {
    out << canonical_dump(Json{{"aggregate", to_string(g.aggregate)},
                               {"consumer_id", g.consumer_id},
                               {"data_type", g.data_type},
                               {"purpose", g.purpose}})
        << "\n";
  }
  return out.str();
}

AccessControlList AccessControlList::parse(std::string_view text) {
  AccessControlList acl;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::ConfigError, "bad grant record: " + line);
    }
    try {
      acl.add({j.at("consumer_id").get<std::string>(),
               j.at("data_type").get<std::string>(),
               aggregate_from_string(j.at("aggregate").get<std::string>()),
               j.at("purpose").get<std::string>()});
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("bad grant record: ") + e.what());
    }
  }
  return acl;
}

}  // namespace smcgate
