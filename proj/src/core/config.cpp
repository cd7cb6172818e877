#include "core/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bd::config {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

double parse_double(const std::string& text, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    require(end && *end == '\0' && end != text.c_str() && errno == 0,
            Status::invalid_input, what + ": not a number: '" + text + "'");
    return v;
}

uint64_t parse_uint(const std::string& text, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    require(end && *end == '\0' && end != text.c_str() && errno == 0 &&
                text.find('-') == std::string::npos,
            Status::invalid_input, what + ": not a non-negative integer: '" + text + "'");
    return static_cast<uint64_t>(v);
}

Ini Ini::parse_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Status::invalid_input, "cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

Ini Ini::parse_string(const std::string& text, const std::string& origin) {
    Ini ini;
    std::string section;
    size_t lineno = 0;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            require(line.back() == ']', Status::invalid_input,
                    origin + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            ini.sections_[section];
            continue;
        }
        const size_t eq = line.find('=');
        require(eq != std::string::npos, Status::invalid_input,
                origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require(!key.empty(), Status::invalid_input,
                origin + ":" + std::to_string(lineno) + ": empty key");
        ini.sections_[section][key] = value;
    }
    return ini;
}

bool Ini::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string Ini::get(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return fallback;
    auto kv = it->second.find(key);
    return kv == it->second.end() ? fallback : kv->second;
}

std::string Ini::require_key(const std::string& section, const std::string& key) const {
    require(has(section, key), Status::invalid_input,
            "missing config key [" + section + "] " + key);
    return get(section, key, "");
}

double Ini::get_double(const std::string& section, const std::string& key,
                       double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_double(get(section, key, ""), "[" + section + "] " + key);
}

uint64_t Ini::get_uint(const std::string& section, const std::string& key,
                       uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    return parse_uint(get(section, key, ""), "[" + section + "] " + key);
}

std::vector<double> Ini::get_doubles(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (!has(section, key)) return out;
    for (const auto& piece : split(get(section, key, ""), ',')) {
        out.push_back(parse_double(trim(piece), "[" + section + "] " + key));
    }
    return out;
}

std::vector<uint64_t> Ini::get_uints(const std::string& section, const std::string& key) const {
    std::vector<uint64_t> out;
    if (!has(section, key)) return out;
    for (const auto& piece : split(get(section, key, ""), ',')) {
        out.push_back(parse_uint(trim(piece), "[" + section + "] " + key));
    }
    return out;
}

void Ini::check_keys(const std::string& section, const std::vector<std::string>& allowed) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return;
    for (const auto& [key, value] : it->second) {
        (void)value;
        require(std::find(allowed.begin(), allowed.end(), key) != allowed.end(),
                Status::invalid_input, "unknown config key [" + section + "] " + key);
    }
}

} // namespace bd::config
