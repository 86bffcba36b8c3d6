#pragma once

// Strict JSON helpers shared by the layout and config loaders. Unknown
// keys are hard errors (a typoed hyperparameter silently falling back to
// a default is the worst failure mode a config file can have), and error
// messages point at the line of the offending key where possible.

#include <initializer_list>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace qd {

using Json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Best-effort line lookup: first occurrence of "key" in the raw text.
inline int line_of_key(const std::string& raw, const std::string& key) {
  const std::string needle = "\"" + key + "\"";
  const size_t at = raw.find(needle);
  if (at == std::string::npos) return -1;
  int line = 1;
  for (size_t i = 0; i < at; ++i) {
    if (raw[i] == '\n') ++line;
  }
  return line;
}

}  // namespace detail

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Json parse_json(const std::string& raw, const std::string& origin) {
  try {
    return Json::parse(raw);
  } catch (const Json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

// Every key of obj must appear in allowed; otherwise report the first
// stray key with its line in the original text.
inline void reject_unknown_keys(const Json& obj, const std::string& raw,
                                const std::string& origin,
                                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      const int line = detail::line_of_key(raw, key);
      std::string where =
          line > 0 ? origin + ":" + std::to_string(line) : origin;
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

inline const Json& require_key(const Json& obj, const std::string& key,
                               const std::string& origin) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError(origin + ": missing required key \"" + key + "\"");
  }
  return *it;
}

}  // namespace qd
