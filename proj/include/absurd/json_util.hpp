#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "absurd/error.hpp"

namespace absurd {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorKind::kParse, std::string("missing field: ") + key);
  return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key) {
  const auto& v = require_field(j, key);
  if (!v.is_string()) fail(ErrorKind::kParse, std::string("field is not a string: ") + key);
  return v.get<std::string>();
}

inline std::int64_t require_int(const nlohmann::json& j, const char* key) {
  const auto& v = require_field(j, key);
  if (!v.is_number_integer()) fail(ErrorKind::kParse, std::string("field is not an integer: ") + key);
  return v.get<std::int64_t>();
}

inline double require_number(const nlohmann::json& j, const char* key) {
  const auto& v = require_field(j, key);
  if (!v.is_number()) fail(ErrorKind::kParse, std::string("field is not a number: ") + key);
  return v.get<double>();
}

inline std::string get_string(const nlohmann::json& j, const char* key,
                              const std::string& fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) fail(ErrorKind::kParse, std::string("field is not a string: ") + key);
  return it->get<std::string>();
}

inline std::int64_t get_int(const nlohmann::json& j, const char* key, std::int64_t fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_number_integer()) fail(ErrorKind::kParse, std::string("field is not an integer: ") + key);
  return it->get<std::int64_t>();
}

inline bool get_bool(const nlohmann::json& j, const char* key, bool fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) fail(ErrorKind::kParse, std::string("field is not a boolean: ") + key);
  return it->get<bool>();
}

// Parse a full JSON document, mapping syntax failures to kParse.
inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::kParse, "invalid JSON in " + what);
  return j;
}

}  // namespace absurd
