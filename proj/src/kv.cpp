#include "cascade/kv.hpp"

#include "cascade/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cascade {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string::size_type start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

double parse_real(const std::string& s, const std::string& context) {
    const std::string t = trim(s);
    double value = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end || t.empty()) {
        throw ConfigError(context + ": expected a real number, got '" + t + "'");
    }
    return value;
}

std::int64_t parse_integer(const std::string& s, const std::string& context) {
    const std::string t = trim(s);
    std::int64_t value = 0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end || t.empty()) {
        throw ConfigError(context + ": expected an integer, got '" + t + "'");
    }
    return value;
}

std::vector<double> parse_real_list(const std::string& s, const std::string& context) {
    std::string normalized = s;
    for (auto& c : normalized) {
        if (c == ',' || c == '\t') c = ' ';
    }
    std::istringstream in(normalized);
    std::vector<double> values;
    std::string tok;
    while (in >> tok) {
        values.push_back(parse_real(tok, context));
    }
    if (values.empty()) {
        throw ConfigError(context + ": expected at least one real number");
    }
    return values;
}

KvFile parse_kv_text(const std::string& text, const std::string& origin) {
    KvFile kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        kv.entries.emplace_back(key, value, line_no);
    }
    return kv;
}

KvFile parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kv_text(buf.str(), path);
}

bool KvFile::has(const std::string& key) const {
    for (const auto& [k, v, line] : entries) {
        if (k == key) return true;
    }
    return false;
}

std::string KvFile::get(const std::string& key, const std::string& fallback) const {
    std::string result = fallback;
    for (const auto& [k, v, line] : entries) {
        if (k == key) result = v;
    }
    return result;
}

std::vector<std::string> KvFile::get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v, line] : entries) {
        if (k == key) out.push_back(v);
    }
    return out;
}

double KvFile::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_real(get(key), "key '" + key + "'");
}

std::int64_t KvFile::get_int(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    return parse_integer(get(key), "key '" + key + "'");
}

bool KvFile::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace cascade
