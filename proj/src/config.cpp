#include "tpm/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tpm/errors.hpp"

namespace tpm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!c.kv_.emplace(key, val).second)
      throw ConfigError("duplicate key: " + key);
  }
  return c;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_string(ss.str());
}

double Config::parse_number(const std::string& text) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  auto to_double = [](const std::string& s) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw ConfigError("not a number: '" + s + "'");
    return x;
  };
  if (slash != std::string::npos) {
    const double num = to_double(trim(t.substr(0, slash)));
    const double den = to_double(trim(t.substr(slash + 1)));
    if (den == 0) throw ConfigError("division by zero in '" + t + "'");
    return num / den;
  }
  return to_double(t);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_number(const std::string& key, double fallback) const {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_number(it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  const double x = get_number(key, fallback);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x) throw ConfigError(key + " must be an integer");
  return i;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + " must be a boolean, got '" + v + "'");
}

std::vector<double> Config::get_number_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> out;
  std::istringstream is(it->second);
  std::string tok;
  while (is >> tok) out.push_back(parse_number(tok));
  if (out.empty()) throw ConfigError(key + " is empty");
  return out;
}

void Config::require_all_consumed() const {
  std::string unknown;
  for (const auto& [k, v] : kv_)
    if (!consumed_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw ConfigError("unknown keys: " + unknown);
}

uint64_t Config::hash() const {
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : kv_) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  return h;
}

std::string Config::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return std::string(buf);
}

}  // namespace tpm
