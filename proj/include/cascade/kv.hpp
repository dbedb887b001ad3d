#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cascade {

// Flat `key = value` text format shared by schema files, synthetic specs and
// run configs. '#' starts a comment; repeated keys accumulate in order.
struct KvFile {
    // (key, value, line_number) in file order.
    std::vector<std::tuple<std::string, std::string, int>> entries;

    bool has(const std::string& key) const;
    // Last value wins for scalar lookups.
    std::string get(const std::string& key, const std::string& fallback = "") const;
    std::vector<std::string> get_all(const std::string& key) const;

    // Typed getters; throw ConfigError with the key name on parse failure.
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
};

KvFile parse_kv_file(const std::string& path);
KvFile parse_kv_text(const std::string& text, const std::string& origin);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Whitespace- or comma-separated list of reals; single value broadcasts when
// the caller expects a longer vector.
std::vector<double> parse_real_list(const std::string& s, const std::string& context);

double parse_real(const std::string& s, const std::string& context);
std::int64_t parse_integer(const std::string& s, const std::string& context);

}  // namespace cascade
