#pragma once

#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gllab/errors.hpp"

namespace gllab {

/**
 * TOML-style configuration: `[section]` headers, `key = value` lines, `#`
 * comments. Values are numbers, true/false, "strings" or [lists] of numbers.
 * Keys before the first header belong to the section "".
 * Keys not listed in the schema are rejected by name.
 */
class Config {
public:
    using Schema = std::map<std::string, std::set<std::string>>;

    static const Schema& schema() {
        static const Schema s{
            {"", {"out", "seed", "jobs"}},
            {"solve", {"kappa", "H", "n", "levels", "grad_tol", "max_iter", "init", "noise", "reproject_every"}},
            {"sweep", {"kappas", "rhos", "grid_rule", "min_n", "max_n", "checkpoints", "family_spread",
                       "edge_distance_bound", "theta0_rho"}},
            {"norms", {"alpha", "p", "corner_exclusion"}},
            {"regime", {"lambda_min", "lambda_max", "kappa_min"}},
            {"spectral", {"T", "n", "tol", "xi_lo", "xi_hi", "sample_step", "landau_count", "mu_xis"}},
            {"halfplane", {"R", "points_per_unit", "edge_half_length", "tol", "max_iter"}},
            {"probe", {"lambda", "S", "R", "points_per_unit", "geometry", "grad_tol", "max_iter"}},
            {"blowup", {"R", "points_per_unit", "x", "y"}},
            {"identity", {"p1", "p2", "r0", "t_max", "h", "bc_limit"}},
        };
        return s;
    }

    static Config parse(const std::string& text) {
        Config c;
        std::string section;
        int lineno = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            std::string line = text.substr(pos, end - pos);
            pos = end + 1;
            ++lineno;
            line = strip(strip_comment(line));
            if (line.empty()) continue;
            const std::string where = "config line " + std::to_string(lineno);
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
                section = strip(line.substr(1, line.size() - 2));
                if (!schema().count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
            const std::string key = strip(line.substr(0, eq));
            const std::string value = strip(line.substr(eq + 1));
            if (!schema().at(section).count(key)) throw ConfigError(where + ": unknown key '" + qualified(section, key) + "'");
            if (value.empty()) throw ConfigError(where + ": empty value for '" + qualified(section, key) + "'");
            c.values_[qualified(section, key)] = value;
        }
        return c;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return to_number(key, values_.at(key));
    }

    int integer(const std::string& key, int fallback) const {
        if (!has(key)) return fallback;
        const double v = to_number(key, values_.at(key));
        if (v != static_cast<double>(static_cast<long long>(v)) || std::abs(v) > 2e9)
            throw ConfigError("config key '" + key + "' must be an integer");
        return static_cast<int>(v);
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string& v = values_.at(key);
        if (v == "true") return true;
        if (v == "false") return false;
        throw ConfigError("config key '" + key + "' must be true or false");
    }

    std::string string(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const std::string& v = values_.at(key);
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
        return v;
    }

    std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const {
        if (!has(key)) return fallback;
        std::string v = values_.at(key);
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            throw ConfigError("config key '" + key + "' must be a list [a, b, ...]");
        v = v.substr(1, v.size() - 2);
        std::vector<double> out;
        std::size_t pos = 0;
        while (pos < v.size()) {
            std::size_t end = v.find(',', pos);
            if (end == std::string::npos) end = v.size();
            const std::string item = strip(v.substr(pos, end - pos));
            if (!item.empty()) out.push_back(to_number(key, item));
            pos = end + 1;
        }
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

    // Sorted key = value text, used for hashing.
    std::string canonical() const {
        std::string s;
        for (const auto& [k, v] : values_) s += k + "=" + v + "\n";
        return s;
    }

private:
    static std::string qualified(const std::string& section, const std::string& key) {
        return section.empty() ? key : section + "." + key;
    }

    static std::string strip(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::string strip_comment(const std::string& s) {
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') quoted = !quoted;
            if (s[i] == '#' && !quoted) return s.substr(0, i);
        }
        return s;
    }

    static double to_number(const std::string& key, const std::string& s) {
        double v = 0.0;
        const char* b = s.data();
        if (!s.empty() && s[0] == '+') ++b;
        const auto res = std::from_chars(b, s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ConfigError("config key '" + key + "' expects a number, got '" + s + "'");
        return v;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace gllab
