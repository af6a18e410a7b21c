#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include "ftrack/error.hpp"
#include "json.hpp"

namespace ftrack::detail {

// Reads obj[key] into out when present; leaves out untouched otherwise.
template <typename T>
void ReadField(const nlohmann::json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string("field '") + key + "': " + e.what());
  }
}

inline void RejectUnknownKeys(const nlohmann::json& obj,
                              std::initializer_list<std::string_view> known,
                              std::string_view section) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string(section) + " must be a JSON object");
  }
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw Error(ErrorCode::kConfigInvalid, "unknown key '" + item.key() +
                                                 "' in " + std::string(section));
    }
  }
}

}  // namespace ftrack::detail
