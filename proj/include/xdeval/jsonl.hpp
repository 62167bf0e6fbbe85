#pragma once

#include <fstream>
#include <functional>
#include <string>

#include "json.hpp"
#include "xdeval/errors.hpp"

namespace xdeval {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Calls fn(line_number, object) for every non-blank line of a JSON Lines
// file. Line numbers are 1-based and quoted in parse errors.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(std::size_t, const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    Json obj = Json::parse(line, nullptr, false);
    if (obj.is_discarded()) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": invalid JSON");
    }
    fn(lineno, obj);
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  Json obj = Json::parse(in, nullptr, false);
  if (obj.is_discarded()) throw ValidationError(path + ": invalid JSON");
  return obj;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace xdeval
