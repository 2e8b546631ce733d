#pragma once

// Declarative experiment configs: `key = value` entries grouped under
// `[section]` headers, `#` comments. CLI flags override file keys through
// apply_override("section.key=value").

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "kinetic/errors.hpp"

namespace kinetic {

class Config {
public:
    static Config parse_text(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string line, section = "global";
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = trim(strip_comment(line));
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw IoError("config line " + std::to_string(lineno) + ": bad section");
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw IoError("config line " + std::to_string(lineno) + ": expected key = value");
            c.sections_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
        }
        return c;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str());
    }

    void apply_override(const std::string& spec) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw IoError("override must be section.key=value");
        const std::string key = trim(spec.substr(0, eq));
        const std::string val = trim(spec.substr(eq + 1));
        const auto dot = key.find('.');
        if (dot == std::string::npos)
            sections_["global"][key] = val;
        else
            sections_[key.substr(0, dot)][key.substr(dot + 1)] = val;
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& dflt = "") const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return dflt;
        const auto k = s->second.find(key);
        return k == s->second.end() ? dflt : k->second;
    }

    double get_double(const std::string& section, const std::string& key, double dflt) const {
        if (!has(section, key)) return dflt;
        return std::stod(get_str(section, key));
    }

    long get_long(const std::string& section, const std::string& key, long dflt) const {
        if (!has(section, key)) return dflt;
        return std::stol(get_str(section, key));
    }

    int get_int(const std::string& section, const std::string& key, int dflt) const {
        return static_cast<int>(get_long(section, key, dflt));
    }

    bool get_bool(const std::string& section, const std::string& key, bool dflt) const {
        if (!has(section, key)) return dflt;
        const std::string v = get_str(section, key);
        return v == "1" || v == "true" || v == "yes" || v == "on";
    }

    /// Sorted canonical rendering; its hash fingerprints the run.
    std::string canonical_text() const {
        std::ostringstream out;
        for (const auto& [sec, kv] : sections_) {
            out << "[" << sec << "]\n";
            for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
        }
        return out.str();
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    static std::string strip_comment(const std::string& s) {
        const auto h = s.find('#');
        return h == std::string::npos ? s : s.substr(0, h);
    }
    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

} // namespace kinetic
