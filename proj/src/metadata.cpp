#include "smcgate/metadata.hpp"

#include <algorithm>
#include <set>

#include "smcgate/policy.hpp"

namespace smcgate {

bool SourceMetadata::offers(const std::string& data_type) const {
  return std::any_of(data_types.begin(), data_types.end(),
                     [&](const DataTypeInfo& d) { return d.name == data_type; });
}

bool SourceMetadata::supports(AggregateKind kind) const {
  return std::find(supported_protocols.begin(), supported_protocols.end(),
                   kind) != supported_protocols.end();
}

void SourceMetadata::validate() const {
  if (source_id.empty()) {
    throw Error(ErrorCode::ConfigError, "source_id must not be empty");
  }
  if (data_types.empty()) {
    throw Error(ErrorCode::ConfigError,
                source_id + ": data_types must not be empty");
  }
  std::set<std::string> names;
  for (const auto& d : data_types) {
    if (!names.insert(d.name).second) {
      throw Error(ErrorCode::ConfigError,
                  source_id + ": duplicate data type " + d.name);
    }
  }
}

Json SourceMetadata::to_json() const {
  Json types = Json::array();
  for (const auto& d : data_types) {
    types.push_back({{"description", d.description},
                     {"name", d.name},
                     {"unit", d.unit}});
  }
  Json protocols = Json::array();
  for (AggregateKind k : supported_protocols) protocols.push_back(to_string(k));
  return Json{{"data_types", types},
              {"scope", scope},
              {"source_id", source_id},
              {"supported_protocols", protocols}};
}

SourceMetadata SourceMetadata::from_json(const Json& j) {
  try {
    SourceMetadata m;
    m.source_id = j.at("source_id").get<std::string>();
    m.scope = j.at("scope").get<std::string>();
    for (const auto& d : j.at("data_types")) {
      m.data_types.push_back({d.at("name").get<std::string>(),
                              d.at("unit").get<std::string>(),
                              d.at("description").get<std::string>()});
    }
    for (const auto& p : j.at("supported_protocols")) {
      m.supported_protocols.push_back(
          aggregate_from_string(p.get<std::string>()));
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedFrame,
                std::string("bad source metadata: ") + e.what());
  }
}

AnnounceAction MetadataDirectory::classify_announce(
    const std::string& source_id, const std::string& endpoint,
    std::int64_t now_ms) const {
  auto it = entries_.find(source_id);
  if (it == entries_.end()) return AnnounceAction::NewSource;
  if (it->second.endpoint == endpoint) return AnnounceAction::Refresh;
  if (is_live(source_id, now_ms)) return AnnounceAction::Reject;
  return AnnounceAction::Replace;
}

void MetadataDirectory::upsert(SourceMetadata metadata,
                               const std::string& endpoint,
                               std::int64_t now_ms) {
  metadata.validate();
  std::string id = metadata.source_id;
  entries_[id] = Entry{std::move(metadata), endpoint, now_ms};
}

void MetadataDirectory::record_heartbeat(const std::string& source_id,
                                         std::int64_t now_ms) {
  auto it = entries_.find(source_id);
  if (it != entries_.end()) it->second.last_heartbeat_ms = now_ms;
}

void MetadataDirectory::mark_dead(const std::string& source_id) {
  auto it = entries_.find(source_id);
  if (it != entries_.end()) {
    it->second.last_heartbeat_ms = -(liveness_timeout_ms_ + 1);
  }
}

bool MetadataDirectory::contains(const std::string& source_id) const {
  return entries_.count(source_id) > 0;
}

bool MetadataDirectory::is_live(const std::string& source_id,
                                std::int64_t now_ms) const {
  auto it = entries_.find(source_id);
  if (it == entries_.end()) return false;
  return now_ms - it->second.last_heartbeat_ms <= liveness_timeout_ms_;
}

const MetadataDirectory::Entry* MetadataDirectory::find(
    const std::string& source_id) const {
  auto it = entries_.find(source_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const MetadataDirectory::Entry*> MetadataDirectory::live_matching(
    const std::string& data_type, const std::string& scope_glob,
    AggregateKind aggregate, std::int64_t now_ms) const {
  std::vector<const Entry*> out;
  for (const auto& [id, entry] : entries_) {
    if (!is_live(id, now_ms)) continue;
    if (!entry.metadata.offers(data_type)) continue;
    if (!glob_match(scope_glob, entry.metadata.scope)) continue;
    if (!entry.metadata.supports(aggregate)) continue;
    out.push_back(&entry);
  }
  return out;
}

bool MetadataDirectory::knows_data_type(const std::string& data_type,
                                        std::int64_t now_ms) const {
  for (const auto& [id, entry] : entries_) {
    if (is_live(id, now_ms) && entry.metadata.offers(data_type)) return true;
  }
  return false;
}

Json MetadataDirectory::listing(std::int64_t now_ms) const {
  std::map<std::string, std::set<std::string>> scopes_by_type;
  std::set<std::string> aggregates;
  for (const auto& [id, entry] : entries_) {
    if (!is_live(id, now_ms)) continue;
    for (const auto& d : entry.metadata.data_types) {
      scopes_by_type[d.name].insert(entry.metadata.scope);
    }
    for (AggregateKind k : entry.metadata.supported_protocols) {
      aggregates.insert(to_string(k));
    }
  }
  Json types = Json::object();
  for (const auto& [name, scopes] : scopes_by_type) {
    types[name] = Json(scopes);
  }
  return Json{{"aggregates", Json(aggregates)}, {"data_types", types}};
}

}  // namespace smcgate
