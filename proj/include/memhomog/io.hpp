#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "memhomog/common.hpp"

namespace memhomog {

// Plain key=value configuration with dotted namespaces. Keys are consumed as
// they are read; anything left unconsumed is rejected, so typos fail loudly.
class Config {
public:
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": expected key=value, got '" + trimmed + "'");
            set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
        }
    }

    void parse_override(const std::string& arg) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("expected key=value argument, got '" + arg + "'");
        set(trim(arg.substr(0, eq)), trim(arg.substr(eq + 1)));
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        consumed_.insert(key);
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_double(key, it->second);
    }

    long get_int(const std::string& key, long fallback) const {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::size_t pos = 0;
        long v = 0;
        try {
            v = std::stol(it->second, &pos);
        } catch (...) {
            throw ConfigError("key '" + key + "': not an integer: '" + it->second + "'");
        }
        if (pos != it->second.size())
            throw ConfigError("key '" + key + "': not an integer: '" + it->second + "'");
        return v;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(it->second, &pos);
        } catch (...) {
            throw ConfigError("key '" + key + "': not an unsigned integer: '" + it->second + "'");
        }
        if (pos != it->second.size())
            throw ConfigError("key '" + key + "': not an unsigned integer: '" + it->second + "'");
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("key '" + key + "': expected true/false, got '" + it->second + "'");
    }

    // Strict-parsing contract: every provided key must have been consumed.
    void reject_unknown() const {
        for (const auto& [key, value] : values_)
            if (!consumed_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    static double parse_double(const std::string& key, const std::string& text) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &pos);
        } catch (...) {
            throw ConfigError("key '" + key + "': not a number: '" + text + "'");
        }
        if (pos != text.size())
            throw ConfigError("key '" + key + "': not a number: '" + text + "'");
        return v;
    }

private:
    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r");
        if (begin == std::string::npos) return "";
        const auto end = s.find_last_not_of(" \t\r");
        return s.substr(begin, end - begin + 1);
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

// Floats are printed with 17 significant digits so a re-parse is bit-exact.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Flat ordered record serialized as a one-level JSON object.
class FlatRecord {
public:
    void add(const std::string& key, double value) {
        entries_.emplace_back(key, format_double(value));
    }
    void add(const std::string& key, int value) { add_integer(key, value); }
    void add(const std::string& key, long value) { add_integer(key, value); }
    void add(const std::string& key, std::uint64_t value) {
        entries_.emplace_back(key, std::to_string(value));
    }
    void add_string(const std::string& key, const std::string& value) {
        entries_.emplace_back(key, "\"" + value + "\"");
    }

    std::string to_json() const {
        std::string out = "{\n";
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            out += "  \"" + entries_[i].first + "\": " + entries_[i].second;
            if (i + 1 < entries_.size()) out += ",";
            out += "\n";
        }
        out += "}\n";
        return out;
    }

private:
    void add_integer(const std::string& key, long long value) {
        entries_.emplace_back(key, std::to_string(value));
    }
    std::vector<std::pair<std::string, std::string>> entries_;
};

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(const std::vector<double>& values) {
        if (values.size() != columns_.size())
            throw NumericError("csv row width mismatch");
        rows_.push_back(values);
    }

    std::string to_string() const {
        std::string out;
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            out += columns_[i];
            out += (i + 1 < columns_.size()) ? ',' : '\n';
        }
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                out += format_double(row[i]);
                out += (i + 1 < row.size()) ? ',' : '\n';
            }
        }
        return out;
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

inline void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("cannot write '" + path + "'");
    out << content;
}

}  // namespace memhomog
