#include "ntklab/tomllite.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace ntklab {

namespace {

[[noreturn]] void fail(std::size_t lineno, const std::string& what) {
  throw std::runtime_error("config line " + std::to_string(lineno) + ": " + what);
}

std::string strip(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// removes a trailing comment that is not inside a string literal
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

nlohmann::json parse_scalar(const std::string& raw, std::size_t lineno) {
  const std::string v = strip(raw);
  if (v.empty()) fail(lineno, "empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail(lineno, "unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  try {
    std::size_t pos = 0;
    if (v.find_first_of(".eE") == std::string::npos &&
        v.find("inf") == std::string::npos && v.find("nan") == std::string::npos) {
      const long long i = std::stoll(v, &pos);
      if (pos == v.size()) return i;
    }
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (...) {
  }
  fail(lineno, "cannot parse value '" + v + "'");
}

nlohmann::json parse_value(const std::string& raw, std::size_t lineno) {
  const std::string v = strip(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') fail(lineno, "unterminated array");
    nlohmann::json arr = nlohmann::json::array();
    const std::string body = v.substr(1, v.size() - 2);
    std::string cell;
    bool in_str = false;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        if (!strip(cell).empty()) arr.push_back(parse_scalar(cell, lineno));
        cell.clear();
      } else {
        cell += c;
      }
    }
    if (!strip(cell).empty()) arr.push_back(parse_scalar(cell, lineno));
    return arr;
  }
  return parse_scalar(v, lineno);
}

}  // namespace

nlohmann::json toml_parse(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "unterminated section header");
      const std::string name = strip(line.substr(1, line.size() - 2));
      if (name.empty()) fail(lineno, "empty section name");
      root[name] = nlohmann::json::object();
      section = &root[name];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
    const std::string key = strip(line.substr(0, eq));
    if (key.empty()) fail(lineno, "empty key");
    (*section)[key] = parse_value(line.substr(eq + 1), lineno);
  }
  return root;
}

}  // namespace ntklab
