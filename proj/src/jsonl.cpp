#include "clara/jsonl.hpp"

#include <fstream>

#include "clara/error.hpp"
#include "clara/text.hpp"

namespace clara {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!record.is_object()) throw ParseError(line_no, "expected a JSON object");
    try {
      fn(record, line_no);
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(line_no, e.what());
    } catch (const Json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << '\n';
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << value.dump(2) << '\n';
}

std::string require_string(const Json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw ParseError(line, std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> require_string_array(const Json& record, const char* key,
                                              std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_array()) {
    throw ParseError(line, std::string("missing or non-array field '") + key + "'");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ParseError(line, std::string("non-string element in '") + key + "'");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace clara
