#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace polymer::cli {

// Malformed or out-of-range configuration. Maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat key = value store read from an INI file. Keys in a section named
// after the subcommand override top-level keys; `[general]` is treated as
// top level. Overrides given as key=value win over both.
class Config {
public:
    static Config from_file(const std::string& path, const std::string& section);
    static Config from_string(const std::string& text, const std::string& section);

    // "key=value"; throws ConfigError if there is no '='.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Comma-separated list.
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    // Throws ConfigError naming the first key not in `allowed`.
    void require_known(const std::set<std::string>& allowed) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::optional<std::string> raw(const std::string& key) const;
    std::map<std::string, std::string> values_;
};

}  // namespace polymer::cli
