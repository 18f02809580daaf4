#ifndef PQCBENCH_CONFIG_HPP
#define PQCBENCH_CONFIG_HPP

// Line-oriented `key = value` configuration reader. Cost profiles, network
// profiles and scenario files all use this one format: '#' starts a comment,
// blank lines are skipped, keys are dotted lowercase identifiers, values are
// numbers, names or comma-separated lists. Duplicate keys: last one wins.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pqcbench {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& origin, int line, const std::string& what_arg)
        : std::runtime_error(origin + ":" + std::to_string(line) + ": " + what_arg),
          origin_(origin), line_(line) {}

    const std::string& origin() const { return origin_; }
    int line() const { return line_; }

private:
    std::string origin_;
    int line_;
};

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

class KeyValueFile {
public:
    static KeyValueFile parse_file(const std::string& path);
    static KeyValueFile parse_text(std::string_view text, std::string origin = "<inline>");

    const std::vector<ConfigEntry>& entries() const { return entries_; }
    const std::string& origin() const { return origin_; }

    bool has(std::string_view key) const;
    std::string get(std::string_view key, std::string fallback) const;
    double get_double(std::string_view key, double fallback) const;
    int64_t get_int(std::string_view key, int64_t fallback) const;
    std::vector<std::string> get_list(std::string_view key) const;

    // Entries whose key starts with `prefix` (used to collect link.* blocks).
    std::vector<ConfigEntry> with_prefix(std::string_view prefix) const;

    // Parses a numeric value, raising ConfigError with the entry's line on junk.
    double require_double(const ConfigEntry& entry) const;

private:
    std::vector<ConfigEntry> entries_;
    std::string origin_;
};

std::vector<std::string> split_list(std::string_view value);

} // namespace pqcbench

#endif
