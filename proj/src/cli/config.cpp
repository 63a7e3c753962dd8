#include "maskbench/cli/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>

namespace maskbench::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Removes a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool valid_key(const std::string& key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
            return false;
        }
    }
    return true;
}

std::string unquote(const std::string& raw, const std::string& where) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\\') {
            if (i + 2 >= raw.size()) throw ConfigError(where + ": dangling escape in string");
            char next = raw[++i];
            switch (next) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default:
                    throw ConfigError(where + ": unsupported escape \"\\" + std::string(1, next) + "\"");
            }
        } else {
            out += c;
        }
    }
    return out;
}

bool parse_int(const std::string& raw, std::int64_t& out) {
    if (raw.empty()) return false;
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(raw.c_str(), &end, 10);
    if (errno != 0 || end != raw.c_str() + raw.size()) return false;
    out = v;
    return true;
}

bool parse_double(const std::string& raw, double& out) {
    if (raw.empty()) return false;
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(raw.c_str(), &end);
    if (errno != 0 || end != raw.c_str() + raw.size()) return false;
    out = v;
    return true;
}

} // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    Config cfg;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string where = path + ":" + std::to_string(line_no);
        std::string text = trim(strip_comment(line));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(text.substr(1, text.size() - 2));
            if (!valid_key(section)) throw ConfigError(where + ": invalid section name \"" + section + "\"");
            continue;
        }
        std::size_t eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        if (!valid_key(key)) throw ConfigError(where + ": invalid key \"" + key + "\"");
        if (value.empty()) throw ConfigError(where + ": missing value for \"" + key + "\"");
        std::string full = section.empty() ? key : section + "." + key;
        if (cfg.raw_.count(full)) throw ConfigError(where + ": duplicate key \"" + full + "\"");
        cfg.raw_[full] = value;
    }
    return cfg;
}

void Config::set_override(const std::string& assignment) {
    std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--set expects key=value, got \"" + assignment + "\"");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& raw_value) {
    if (!valid_key(key)) throw ConfigError("invalid config key \"" + key + "\"");
    raw_[key] = raw_value;
}

bool Config::has(const std::string& key) const { return raw_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    const std::string& raw = it->second;
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
        return unquote(raw, "config key " + key);
    }
    return raw;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    std::int64_t v = 0;
    if (!parse_int(it->second, v)) {
        throw ConfigError("config key " + key + " must be an integer, got \"" + it->second + "\"");
    }
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    double v = 0.0;
    if (!parse_double(it->second, v)) {
        throw ConfigError("config key " + key + " must be a number, got \"" + it->second + "\"");
    }
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ConfigError("config key " + key + " must be true or false, got \"" + it->second + "\"");
}

std::vector<int> Config::get_int_list(const std::string& key, const std::vector<int>& fallback) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    std::string raw = it->second;
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
        throw ConfigError("config key " + key + " must be an array like [0, 1, 2]");
    }
    std::vector<int> out;
    std::string body = trim(raw.substr(1, raw.size() - 2));
    if (body.empty()) return out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = body.find(',', pos);
        std::string item =
            trim(comma == std::string::npos ? body.substr(pos) : body.substr(pos, comma - pos));
        std::int64_t v = 0;
        if (!parse_int(item, v)) {
            throw ConfigError("config key " + key + " has a non-integer element \"" + item + "\"");
        }
        out.push_back(static_cast<int>(v));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

dataset::ordered_json Config::snapshot() const {
    dataset::ordered_json snap = dataset::ordered_json::object();
    for (const auto& [key, raw] : raw_) {
        std::int64_t i = 0;
        double d = 0.0;
        if (raw == "true") {
            snap[key] = true;
        } else if (raw == "false") {
            snap[key] = false;
        } else if (parse_int(raw, i)) {
            snap[key] = i;
        } else if (parse_double(raw, d)) {
            snap[key] = d;
        } else if (raw.size() >= 2 && raw.front() == '[' && raw.back() == ']') {
            snap[key] = get_int_list(key, {});
        } else {
            snap[key] = get_string(key, "");
        }
    }
    return snap;
}

} // namespace maskbench::cli
