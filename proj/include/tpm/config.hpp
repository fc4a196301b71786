#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace tpm {

/// Flat key = value configuration, keys namespaced (geometry.shape, ...).
/// '#' starts a comment.  Values may be plain numbers or fractions ("1/16").
/// Every key must be consumed by a typed getter; leftovers are errors.
class Config {
 public:
  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_number(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_number_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  /// Throws ConfigError naming any key no getter consumed.
  void require_all_consumed() const;

  /// FNV-1a over the canonical (sorted) "key=value" lines.
  uint64_t hash() const;
  std::string hash_hex() const;

  static double parse_number(const std::string& text);

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> consumed_;
};

}  // namespace tpm
