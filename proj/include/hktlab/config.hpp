#pragma once

// Plain key=value run configuration with '#' comments, command-line
// overrides, typed range-checked getters, and strict unknown-key detection.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hktlab/common.hpp"

namespace hktlab {

class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig fromFile(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open config: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      cfg.parseLine(line, path + ":" + std::to_string(lineno));
    }
    return cfg;
  }

  /// "key=value" override (later settings win).
  void setOverride(const std::string& assignment) {
    parseLine(assignment, "override '" + assignment + "'");
  }
  void set(const std::string& key, const std::string& value) {
    kv_[key] = value;
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string getString(const std::string& key, const std::string& dflt) {
    used_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }

  long getInt(const std::string& key, long dflt, long lo, long hi) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return checkRange(key, dflt, lo, hi);
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(it->second, &pos);
    } catch (...) {
      throw InputError("config key '" + key + "': not an integer: " + it->second);
    }
    if (pos != it->second.size())
      throw InputError("config key '" + key + "': trailing junk: " + it->second);
    return checkRange(key, v, lo, hi);
  }

  double getDouble(const std::string& key, double dflt, double lo, double hi) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return checkRangeD(key, dflt, lo, hi);
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(it->second, &pos);
    } catch (...) {
      throw InputError("config key '" + key + "': not a number: " + it->second);
    }
    if (pos != it->second.size())
      throw InputError("config key '" + key + "': trailing junk: " + it->second);
    return checkRangeD(key, v, lo, hi);
  }

  /// Comma-separated list of integers.
  std::vector<int> getIntList(const std::string& key,
                              const std::vector<int>& dflt, long lo, long hi) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    std::vector<int> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        const long v = std::stol(item);
        checkRange(key, v, lo, hi);
        out.push_back(static_cast<int>(v));
      } catch (const InputError&) {
        throw;
      } catch (...) {
        throw InputError("config key '" + key + "': bad list entry: " + item);
      }
    }
    if (out.empty()) throw InputError("config key '" + key + "': empty list");
    return out;
  }

  /// Every present key must have been consumed by a getter.
  void assertAllUsed() const {
    for (const auto& [k, v] : kv_)
      if (!used_.count(k)) throw InputError("unknown config key: " + k);
  }

 private:
  void parseLine(const std::string& raw, const std::string& where) {
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto notSpace = [](unsigned char c) { return !std::isspace(c); };
    line.erase(line.begin(),
               std::find_if(line.begin(), line.end(), notSpace));
    line.erase(std::find_if(line.rbegin(), line.rend(), notSpace).base(),
               line.end());
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("expected key=value at " + where);
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notSpace).base(), key.end());
    value.erase(value.begin(),
                std::find_if(value.begin(), value.end(), notSpace));
    if (key.empty()) throw InputError("empty key at " + where);
    kv_[key] = value;
  }

  long checkRange(const std::string& key, long v, long lo, long hi) {
    if (v < lo || v > hi)
      throw InputError("config key '" + key + "' out of range [" +
                       std::to_string(lo) + "," + std::to_string(hi) +
                       "]: " + std::to_string(v));
    return v;
  }
  double checkRangeD(const std::string& key, double v, double lo, double hi) {
    if (!(v >= lo && v <= hi))
      throw InputError("config key '" + key + "' out of range [" +
                       std::to_string(lo) + "," + std::to_string(hi) +
                       "]: " + std::to_string(v));
    return v;
  }

  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

}  // namespace hktlab
