#include "stochlab/config.hpp"

#include "stochlab/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace stochlab {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::size_t skip_space(const std::string& s, std::size_t i) {
    while (i < s.size() && is_space(s[i])) ++i;
    return i;
}

std::string trim_right(std::string s) {
    while (!s.empty() && is_space(s.back())) s.pop_back();
    return s;
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; });
}

std::string qualified(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
}

std::vector<std::string> split_items(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',' || is_space(c)) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    const auto r = std::from_chars(b, e, out);
    return r.ec == std::errc() && r.ptr == e;
}

}  // namespace

IniDocument IniDocument::parse(const std::string& text) {
    IniDocument doc;
    std::string section;
    doc.sections_[section];
    doc.order_.push_back(section);
    std::set<std::string> seen_sections;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::size_t i = skip_space(raw, 0);
        if (i >= raw.size() || raw[i] == '#' || raw[i] == ';') continue;

        if (raw[i] == '[') {
            const std::size_t close = raw.find(']', i);
            if (close == std::string::npos) throw ParseError("unterminated section header", lineno, i + 1);
            std::string name = raw.substr(i + 1, close - i - 1);
            const std::size_t lead = skip_space(name, 0);
            name = trim_right(name.substr(lead));
            if (!valid_name(name)) throw ParseError("invalid section name '" + name + "'", lineno, i + 2);
            const std::size_t rest = skip_space(raw, close + 1);
            if (rest < raw.size() && raw[rest] != '#' && raw[rest] != ';')
                throw ParseError("unexpected text after section header", lineno, rest + 1);
            if (!seen_sections.insert(name).second)
                throw ParseError("duplicate section [" + name + "]", lineno, i + 1);
            section = name;
            doc.sections_[section];
            doc.order_.push_back(section);
            continue;
        }

        const std::size_t eq = raw.find('=', i);
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno, i + 1);
        const std::string key = trim_right(raw.substr(i, eq - i));
        if (!valid_name(key)) throw ParseError("invalid key '" + key + "'", lineno, i + 1);
        const std::size_t vstart = skip_space(raw, eq + 1);
        std::size_t vend = raw.size();
        for (std::size_t k = vstart; k < raw.size(); ++k)
            if ((raw[k] == '#' || raw[k] == ';') && (k == vstart || is_space(raw[k - 1]))) {
                vend = k;
                break;
            }
        const std::string value = trim_right(raw.substr(std::min(vstart, raw.size()), vend - std::min(vstart, vend)));
        auto& entries = doc.sections_[section];
        if (entries.count(key)) throw ParseError("duplicate key '" + qualified(section, key) + "'", lineno, i + 1);
        entries.emplace(key, Entry{value, lineno, vstart + 1});
    }
    return doc;
}

bool IniDocument::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

const IniDocument::Entry* IniDocument::find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

std::vector<std::string> IniDocument::section_names() const { return order_; }

std::vector<std::string> IniDocument::keys(const std::string& section) const {
    std::vector<std::string> out;
    const auto s = sections_.find(section);
    if (s != sections_.end())
        for (const auto& [k, v] : s->second) out.push_back(k);
    return out;
}

std::string IniDocument::get_string(const std::string& section, const std::string& key,
                                    const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

double IniDocument::get_double(const std::string& section, const std::string& key, double fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    double v = 0.0;
    if (!parse_double(e->value, v))
        throw ValidationError(key, "expected a number, got '" + e->value + "' (line " + std::to_string(e->line) + ")");
    return v;
}

std::int64_t IniDocument::get_int(const std::string& section, const std::string& key, std::int64_t fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::int64_t v = 0;
    const char* b = e->value.data();
    const auto r = std::from_chars(b, b + e->value.size(), v);
    if (r.ec != std::errc() || r.ptr != b + e->value.size())
        throw ValidationError(key, "expected an integer, got '" + e->value + "' (line " + std::to_string(e->line) + ")");
    return v;
}

std::uint64_t IniDocument::get_uint(const std::string& section, const std::string& key, std::uint64_t fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const char* b = e->value.data();
    const auto r = std::from_chars(b, b + e->value.size(), v);
    if (r.ec != std::errc() || r.ptr != b + e->value.size())
        throw ValidationError(key, "expected a non-negative integer, got '" + e->value + "' (line " +
                                       std::to_string(e->line) + ")");
    return v;
}

bool IniDocument::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
    if (e->value == "false" || e->value == "no" || e->value == "0") return false;
    throw ValidationError(key, "expected true or false, got '" + e->value + "'");
}

std::vector<double> IniDocument::get_doubles(const std::string& section, const std::string& key,
                                             const std::vector<double>& fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const auto& item : split_items(e->value)) {
        double v = 0.0;
        if (!parse_double(item, v)) throw ValidationError(key, "expected numbers, got '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(key, "expected at least one number");
    return out;
}

std::vector<std::string> IniDocument::get_list(const std::string& section, const std::string& key,
                                               const std::vector<std::string>& fallback) const {
    const Entry* e = find(section, key);
    return e ? split_items(e->value) : fallback;
}

void IniDocument::require_known(const std::string& section, const std::set<std::string>& allowed) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [k, e] : s->second)
        if (!allowed.count(k))
            throw ValidationError(qualified(section, k), "unknown key (line " + std::to_string(e.line) + ")");
}

}  // namespace stochlab
