#pragma once

#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "vist/errors.hpp"

namespace vist {

using Json = nlohmann::json;

// Raised for schema violations in config and record JSON.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

inline void reject_unknown_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
  require_object(j, where);
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

// Reads j[key] into `out` when present; type errors name the field.
template <typename V>
void read_opt(const Json& j, const char* key, V& out, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<V>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename V>
V read_req(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  V out{};
  read_opt(j, key, out, where);
  return out;
}

}  // namespace vist
