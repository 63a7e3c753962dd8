#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "maskbench/dataset/json_util.hpp"

namespace maskbench::cli {

// Flat configuration: dotted keys mapping to scalar or number-array values
// parsed from a small TOML subset ([section] headers, key = value, strings,
// integers, floats, booleans, arrays of numbers, # comments). Flag overrides
// land on top via set(), so precedence is flag > file > default.
class Config {
  public:
    Config() = default;

    static Config from_file(const std::string& path);

    // Applies one "key=value" override (the --set syntax); value text uses
    // the same scalar grammar as the file.
    void set_override(const std::string& assignment);
    void set(const std::string& key, const std::string& raw_value);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

    // Sorted-key JSON view of every setting, typed best-effort; this is what
    // run records store as their config snapshot.
    dataset::ordered_json snapshot() const;

  private:
    std::map<std::string, std::string> raw_; // dotted key -> raw value text
};

} // namespace maskbench::cli
