#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace unotb {

// Flat "key = value" configuration with '#' comments. Keys are dotted paths
// (k.1.tau = 5). Reads are tracked so a run can reject keys it never used,
// which catches typos without a schema.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);   // IoError if absent
  static ConfigMap parse_string(const std::string& text,
                                const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);
  int64_t get_int(const std::string& key);
  int64_t get_int(const std::string& key, int64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  // Comma-separated integers, e.g. "128,128,128".
  std::vector<int64_t> get_int_list(const std::string& key,
                                    const std::vector<int64_t>& fallback);
  // Comma-separated reals; rows of a matrix are separated by ';'.
  std::vector<double> get_double_list(const std::string& key);

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  // Throws ConfigError naming every key that was never read.
  void require_all_consumed() const;

  // Sorted "key = value" lines; the canonical form behind config hashing
  // and manifest echoes.
  std::string canonical() const;
  std::string hash() const;  // FNV-1a of canonical(), hex

 private:
  std::string raw(const std::string& key);
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
  std::string origin_;
};

}  // namespace unotb
