#pragma once

// nlohmann::json conversions for the record types. Internal to the library.

#include <optional>

#include "json.hpp"
#include "webdep/classify.hpp"
#include "webdep/error.hpp"
#include "webdep/metrics.hpp"
#include "webdep/probe.hpp"
#include "webdep/trends.hpp"

namespace nlohmann {

template <typename T>
struct adl_serializer<std::optional<T>> {
  static void to_json(json& j, const std::optional<T>& v) {
    if (v) {
      j = *v;
    } else {
      j = nullptr;
    }
  }
  static void from_json(const json& j, std::optional<T>& v) {
    if (j.is_null()) {
      v.reset();
    } else {
      v = j.get<T>();
    }
  }
};

template <typename Tag>
struct adl_serializer<webdep::DomainKey<Tag>> {
  static void to_json(json& j, const webdep::DomainKey<Tag>& v) { j = v.value(); }
  static void from_json(const json& j, webdep::DomainKey<Tag>& v) {
    v = webdep::DomainKey<Tag>(j.get<std::string>());
  }
};

}  // namespace nlohmann

namespace webdep {

using json = nlohmann::json;

void to_json(json& j, const SiteRecord& v);
void from_json(const json& j, SiteRecord& v);
void to_json(json& j, const DnsFacts& v);
void from_json(const json& j, DnsFacts& v);
void to_json(json& j, const TlsFacts& v);
void from_json(const json& j, TlsFacts& v);
void to_json(json& j, const ResourceSet& v);
void from_json(const json& j, ResourceSet& v);
void to_json(json& j, const CnameChain& v);
void from_json(const json& j, CnameChain& v);
void to_json(json& j, const StageError& v);
void from_json(const json& j, StageError& v);
void to_json(json& j, const ProbeResult& v);
void from_json(const json& j, ProbeResult& v);

void to_json(json& j, const ServiceClassification& v);
void from_json(const json& j, ServiceClassification& v);
void to_json(json& j, const SiteDependencyReport& v);
void from_json(const json& j, SiteDependencyReport& v);

void to_json(json& j, const Rate& v);
void from_json(const json& j, Rate& v);
void to_json(json& j, const IndirectEdge& v);
void from_json(const json& j, IndirectEdge& v);
void to_json(json& j, const IndirectDependencyReport& v);
void from_json(const json& j, IndirectDependencyReport& v);

// Parses `text` as JSON, rethrowing parse and type errors as `code`.
json parse_json(std::string_view text, ErrorCode code, std::string_view what);

}  // namespace webdep
