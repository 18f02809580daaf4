#include "pqcbench/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pqcbench {

namespace {

std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

std::vector<std::string> split_list(std::string_view value) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= value.size()) {
        size_t comma = value.find(',', pos);
        if (comma == std::string_view::npos) comma = value.size();
        std::string_view item = trim(value.substr(pos, comma - pos));
        if (!item.empty()) out.emplace_back(item);
        pos = comma + 1;
    }
    return out;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path, 0, "cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

KeyValueFile KeyValueFile::parse_text(std::string_view text, std::string origin) {
    KeyValueFile cfg;
    cfg.origin_ = std::move(origin);
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (pos > text.size() && raw.empty()) break;

        size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        std::string_view line = trim(raw);
        if (line.empty()) continue;

        size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(cfg.origin_, line_no, "expected `key = value`");
        }
        std::string_view key = trim(line.substr(0, eq));
        std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(cfg.origin_, line_no, "empty key");
        }
        cfg.entries_.push_back({std::string(key), std::string(value), line_no});
    }
    return cfg;
}

bool KeyValueFile::has(std::string_view key) const {
    for (const auto& e : entries_) {
        if (e.key == key) return true;
    }
    return false;
}

std::string KeyValueFile::get(std::string_view key, std::string fallback) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->key == key) return it->value;
    }
    return fallback;
}

double KeyValueFile::require_double(const ConfigEntry& entry) const {
    double value = 0;
    const char* first = entry.value.data();
    const char* last = first + entry.value.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError(origin_, entry.line, "`" + entry.key + "`: not a number: `" + entry.value + "`");
    }
    return value;
}

double KeyValueFile::get_double(std::string_view key, double fallback) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->key == key) return require_double(*it);
    }
    return fallback;
}

int64_t KeyValueFile::get_int(std::string_view key, int64_t fallback) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->key != key) continue;
        int64_t value = 0;
        const char* first = it->value.data();
        const char* last = first + it->value.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) {
            throw ConfigError(origin_, it->line, "`" + it->key + "`: not an integer: `" + it->value + "`");
        }
        return value;
    }
    return fallback;
}

std::vector<std::string> KeyValueFile::get_list(std::string_view key) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->key == key) return split_list(it->value);
    }
    return {};
}

std::vector<ConfigEntry> KeyValueFile::with_prefix(std::string_view prefix) const {
    std::vector<ConfigEntry> out;
    for (const auto& e : entries_) {
        if (e.key.size() > prefix.size() && e.key.compare(0, prefix.size(), prefix) == 0) {
            out.push_back(e);
        }
    }
    return out;
}

} // namespace pqcbench
