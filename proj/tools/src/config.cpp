#include "polymer_cli/config.hpp"

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

namespace polymer::cli {

namespace {

namespace pt = boost::property_tree;

Config from_tree(const pt::ptree& tree, const std::string& section) {
    Config cfg;
    std::map<std::string, std::string> scoped;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            cfg.set(name, node.data());
            continue;
        }
        if (name == "general") {
            for (const auto& [k, v] : node) cfg.set(k, v.data());
        } else if (name == section) {
            for (const auto& [k, v] : node) scoped[k] = v.data();
        }
        // Sections for other subcommands are ignored.
    }
    for (const auto& [k, v] : scoped) cfg.set(k, v);
    return cfg;
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string s = boost::algorithm::trim_copy(text);
    // Accept simple fractions such as 1/22.
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const double num = parse_double(key, s.substr(0, slash));
        const double den = parse_double(key, s.substr(slash + 1));
        if (den == 0.0) throw ConfigError("config: " + key + " divides by zero");
        return num / den;
    }
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("config: " + key + " = '" + text + "' is not a number");
    }
    return v;
}

}  // namespace

Config Config::from_file(const std::string& path, const std::string& section) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), section);
}

Config Config::from_string(const std::string& text, const std::string& section) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.message() + " at line " + std::to_string(e.line()));
    }
    return from_tree(tree, section);
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    std::string key = boost::algorithm::trim_copy(assignment.substr(0, eq));
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    set(key, assignment.substr(eq + 1));
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key] = boost::algorithm::trim_copy(value);
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::optional<std::string> Config::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return raw(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto r = raw(key);
    return r ? parse_double(key, *r) : fallback;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    const auto r = raw(key);
    if (!r) return fallback;
    const double v = parse_double(key, *r);
    if (v != static_cast<double>(static_cast<std::int64_t>(v))) {
        throw ConfigError("config: " + key + " must be an integer");
    }
    return static_cast<std::int64_t>(v);
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
    const auto r = raw(key);
    if (!r) return fallback;
    std::uint64_t v = 0;
    const auto res = std::from_chars(r->data(), r->data() + r->size(), v);
    if (r->empty() || res.ec != std::errc() || res.ptr != r->data() + r->size()) {
        throw ConfigError("config: " + key + " must be a non-negative integer");
    }
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto r = raw(key);
    if (!r) return fallback;
    if (*r == "true" || *r == "1" || *r == "yes" || *r == "on") return true;
    if (*r == "false" || *r == "0" || *r == "no" || *r == "off") return false;
    throw ConfigError("config: " + key + " must be a boolean");
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto r = raw(key);
    if (!r) return fallback;
    std::vector<double> out;
    std::stringstream ss(*r);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("config: " + key + " is an empty list");
    return out;
}

void Config::require_known(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : values_) {
        if (!allowed.count(k)) throw ConfigError("config: unknown key '" + k + "'");
    }
}

}  // namespace polymer::cli
