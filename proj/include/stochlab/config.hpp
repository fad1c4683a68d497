#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stochlab {

// Sectioned key = value text:
//
//   # comment
//   [section]
//   key = value     ; trailing comments start with # or ;
//
// Keys outside any section belong to section "". Duplicate keys and
// duplicate sections are parse errors.
class IniDocument {
public:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        std::size_t column = 0;  // of the value
    };

    static IniDocument parse(const std::string& text);

    bool has_section(const std::string& section) const { return sections_.count(section) != 0; }
    bool has(const std::string& section, const std::string& key) const;
    const Entry* find(const std::string& section, const std::string& key) const;
    std::vector<std::string> section_names() const;
    std::vector<std::string> keys(const std::string& section) const;

    // Typed access. Missing keys return the fallback; malformed values throw
    // ValidationError naming the key.
    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& section, const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    // Comma- or whitespace-separated numbers.
    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                      const std::vector<std::string>& fallback) const;

    // Throws ValidationError for the first key of `section` not in `allowed`.
    void require_known(const std::string& section, const std::set<std::string>& allowed) const;

private:
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::vector<std::string> order_;
};

}  // namespace stochlab
