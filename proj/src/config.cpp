#include "unotb/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "unotb/error.hpp"

namespace unotb {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError("key '" + key + "': cannot parse '" + t +
                      "' as a number");
  return out;
}

int64_t parse_int(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError("key '" + key + "': cannot parse '" + t +
                      "' as an integer");
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text,
                                  const std::string& origin) {
  ConfigMap cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!cfg.values_.emplace(key, value).second)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
  }
  return cfg;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

bool ConfigMap::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string ConfigMap::raw(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("missing required key '" + key + "' in " + origin_);
  consumed_.insert(key);
  return it->second;
}

std::string ConfigMap::get_string(const std::string& key) { return raw(key); }

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) {
  return has(key) ? raw(key) : fallback;
}

double ConfigMap::get_double(const std::string& key) {
  return parse_double(raw(key), key);
}

double ConfigMap::get_double(const std::string& key, double fallback) {
  return has(key) ? get_double(key) : fallback;
}

int64_t ConfigMap::get_int(const std::string& key) {
  return parse_int(raw(key), key);
}

int64_t ConfigMap::get_int(const std::string& key, int64_t fallback) {
  return has(key) ? get_int(key) : fallback;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const std::string v = raw(key);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("key '" + key + "': cannot parse '" + v + "' as a bool");
}

std::vector<int64_t> ConfigMap::get_int_list(
    const std::string& key, const std::vector<int64_t>& fallback) {
  if (!has(key)) return fallback;
  std::vector<int64_t> out;
  for (const std::string& part : split(raw(key), ','))
    if (!trim(part).empty()) out.push_back(parse_int(part, key));
  return out;
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) {
  std::vector<double> out;
  for (const std::string& row : split(raw(key), ';'))
    for (const std::string& part : split(row, ','))
      if (!trim(part).empty()) out.push_back(parse_double(part, key));
  return out;
}

std::vector<std::string> ConfigMap::keys_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (auto it = values_.lower_bound(prefix);
       it != values_.end() && it->first.rfind(prefix, 0) == 0; ++it)
    out.push_back(it->first);
  return out;
}

void ConfigMap::require_all_consumed() const {
  std::string leftover;
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key)) leftover += (leftover.empty() ? "" : ", ") + key;
  if (!leftover.empty())
    throw ConfigError("unknown key(s) in " + origin_ + ": " + leftover);
}

std::string ConfigMap::canonical() const {
  std::string out;
  for (const auto& [key, value] : values_)
    out += key + " = " + value + "\n";
  return out;
}

std::string ConfigMap::hash() const {
  const std::string text = canonical();
  uint64_t h = 14695981039346656037ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace unotb
