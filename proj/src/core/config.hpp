#ifndef BD_CONFIG_HPP
#define BD_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace bd::config {

// Flat key-value text with [section] headers. Full-line comments start with
// '#' or ';'. Values are kept verbatim (trimmed).
class Ini {
public:
    static Ini parse_file(const std::string& path);
    static Ini parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::string require_key(const std::string& section, const std::string& key) const;

    double get_double(const std::string& section, const std::string& key, double fallback) const;
    uint64_t get_uint(const std::string& section, const std::string& key, uint64_t fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
    std::vector<uint64_t> get_uints(const std::string& section, const std::string& key) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

    // Rejects keys in `section` that are not in `allowed`; catches typos.
    void check_keys(const std::string& section, const std::vector<std::string>& allowed) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

double parse_double(const std::string& text, const std::string& what);
uint64_t parse_uint(const std::string& text, const std::string& what);

} // namespace bd::config

#endif
