#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "oscifd/core.hpp"
#include "oscifd/errors.hpp"
#include "oscifd/planner.hpp"
#include "oscifd/schemes.hpp"

namespace oscifd {

// ---------------------------------------------------------------------------
// Minimal strict TOML reader.
//
// Supported subset: [section] tables, key = value lines, # comments, values of
// type string, boolean, integer, float, and single- or multi-line arrays of
// numbers or strings. Unknown sections/keys are rejected by the config layer;
// anything outside the subset is a parse error. This is all the experiment
// format uses.
// ---------------------------------------------------------------------------

namespace toml {

using Value = std::variant<bool, long, double, std::string, std::vector<double>, std::vector<std::string>>;
using Table = std::map<std::string, Value>;
using Document = std::map<std::string, Table>;

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Remove a trailing comment, respecting string quotes.
inline std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        else if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

inline bool parse_number(const std::string& tok, Value& out) {
    const std::string t = strip(tok);
    if (t.empty()) return false;
    bool looks_float = t.find_first_of(".eE") != std::string::npos ||
                       t == "inf" || t == "-inf" || t == "nan";
    try {
        std::size_t pos = 0;
        if (!looks_float) {
            const long v = std::stol(t, &pos);
            if (pos == t.size()) { out = v; return true; }
        }
        pos = 0;
        const double v = std::stod(t, &pos);
        if (pos == t.size()) { out = v; return true; }
    } catch (const std::exception&) {
        return false;
    }
    return false;
}

inline Value parse_scalar(const std::string& raw, const std::string& context) {
    const std::string t = strip(raw);
    if (t.empty()) throw ConfigError("empty value for " + context);
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"') throw ConfigError("unterminated string for " + context);
        return t.substr(1, t.size() - 2);
    }
    if (t == "true") return true;
    if (t == "false") return false;
    Value v;
    if (parse_number(t, v)) return v;
    throw ConfigError("cannot parse value '" + t + "' for " + context);
}

inline Value parse_array(const std::string& body, const std::string& context) {
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    for (char c : body) {
        if (c == '"') { in_string = !in_string; cur += c; }
        else if (c == ',' && !in_string) { items.push_back(cur); cur.clear(); }
        else cur += c;
    }
    if (!strip(cur).empty()) items.push_back(cur);
    std::vector<double> nums;
    std::vector<std::string> strs;
    bool any_str = false, any_num = false;
    for (const std::string& item : items) {
        Value v = parse_scalar(item, context);
        if (std::holds_alternative<std::string>(v)) { any_str = true; strs.push_back(std::get<std::string>(v)); }
        else if (std::holds_alternative<long>(v)) { any_num = true; nums.push_back(static_cast<double>(std::get<long>(v))); }
        else if (std::holds_alternative<double>(v)) { any_num = true; nums.push_back(std::get<double>(v)); }
        else throw ConfigError("unsupported array element in " + context);
    }
    if (any_str && any_num) throw ConfigError("mixed array types in " + context);
    if (any_str) return strs;
    return nums;
}

} // namespace detail

inline Document parse(std::istream& in) {
    Document doc;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::strip(detail::strip_comment(line));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = detail::strip(t.substr(1, t.size() - 2));
            if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            doc[section];
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::strip(t.substr(0, eq));
        std::string val = detail::strip(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
        if (doc[section].count(key)) throw ConfigError("duplicate key '" + key + "' in [" + section + "]");
        const std::string context = "[" + section + "]." + key;
        if (!val.empty() && val.front() == '[') {
            // array; may span multiple lines until the closing bracket
            std::string body = val.substr(1);
            while (body.find(']') == std::string::npos) {
                std::string cont;
                if (!std::getline(in, cont)) throw ConfigError("unterminated array for " + context);
                ++lineno;
                body += detail::strip(detail::strip_comment(cont));
            }
            const std::size_t close = body.find(']');
            if (!detail::strip(body.substr(close + 1)).empty())
                throw ConfigError("trailing characters after array for " + context);
            doc[section][key] = detail::parse_array(body.substr(0, close), context);
        } else {
            doc[section][key] = detail::parse_scalar(val, context);
        }
    }
    return doc;
}

inline Document parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
}

} // namespace toml

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class DiscretizationMode { direct, planner };
enum class SchemeChoice { leapfrog, crank_nicolson, both };
enum class AlphaBranchRule { fixed, scale_with_h };

struct ExperimentConfig {
    PhysicalSetup setup;

    DiscretizationMode mode = DiscretizationMode::planner;
    // direct mode
    double tau = 0.0;
    double h = 0.0;
    double tau_coeff = 0.0;   // sweep rule tau = tau_coeff * h^tau_power (0 = use fixed tau)
    double tau_power = 1.0;
    // planner mode
    double rho = 4.0;
    int alpha_branch = 1;
    int beta_branch = 1;
    double theta_max = 0.9;
    int target_M = 0;
    AlphaBranchRule alpha_branch_rule = AlphaBranchRule::fixed;
    double tau_over_h = 1.0;  // used by scale_with_h

    SchemeChoice scheme = SchemeChoice::crank_nicolson;
    CnConfig cn;
    CnAdvance cn_advance = CnAdvance::automatic;
    BootstrapMode bootstrap_mode = BootstrapMode::cn_half;
    double blowup_ceiling = 1e6;

    bool reference_enabled = false;
    int m_ref_multiple = 64;
    double tau_ref = 1e-4;

    long stride = 1;

    Scheme single_scheme() const {
        if (scheme == SchemeChoice::both) throw ConfigError("this command needs a single scheme, not 'both'");
        return scheme == SchemeChoice::leapfrog ? Scheme::leapfrog : Scheme::crank_nicolson;
    }
};

namespace detail {

inline const toml::Value& require(const toml::Table& tab, const std::string& section, const std::string& key) {
    auto it = tab.find(key);
    if (it == tab.end()) throw ConfigError("missing required key [" + section + "]." + key);
    return it->second;
}

inline double as_double(const toml::Value& v, const std::string& context) {
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    if (std::holds_alternative<long>(v)) return static_cast<double>(std::get<long>(v));
    throw ConfigError(context + " must be a number");
}

inline long as_int(const toml::Value& v, const std::string& context) {
    if (std::holds_alternative<long>(v)) return std::get<long>(v);
    throw ConfigError(context + " must be an integer");
}

inline bool as_bool(const toml::Value& v, const std::string& context) {
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
    throw ConfigError(context + " must be a boolean");
}

inline std::string as_string(const toml::Value& v, const std::string& context) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    throw ConfigError(context + " must be a string");
}

inline std::vector<double> as_double_array(const toml::Value& v, const std::string& context) {
    if (std::holds_alternative<std::vector<double>>(v)) return std::get<std::vector<double>>(v);
    throw ConfigError(context + " must be an array of numbers");
}

inline void reject_unknown(const toml::Table& tab, const std::string& section,
                           const std::set<std::string>& allowed) {
    for (const auto& [key, value] : tab) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key [" + section + "]." + key);
        }
    }
}

} // namespace detail

inline ExperimentConfig load_config(const toml::Document& doc) {
    using namespace detail;
    ExperimentConfig cfg;
    static const std::set<std::string> known_sections = {"physics", "discretization", "scheme", "reference",
                                                         "output"};
    for (const auto& [name, table] : doc) {
        if (!known_sections.count(name)) throw ConfigError("unknown section [" + name + "]");
    }

    // physics
    {
        auto it = doc.find("physics");
        if (it == doc.end()) throw ConfigError("missing [physics] section");
        const toml::Table& t = it->second;
        reject_unknown(t, "physics",
                       {"epsilon", "kappa", "lambda", "domain_left", "domain_right", "final_time", "envelope",
                        "envelope_sigma", "envelope_center", "envelope_value", "envelope_samples_re",
                        "envelope_samples_im"});
        cfg.setup.epsilon = as_double(require(t, "physics", "epsilon"), "[physics].epsilon");
        cfg.setup.kappa = as_double(require(t, "physics", "kappa"), "[physics].kappa");
        cfg.setup.lambda = as_double(require(t, "physics", "lambda"), "[physics].lambda");
        if (t.count("domain_left")) cfg.setup.domain_left = as_double(t.at("domain_left"), "[physics].domain_left");
        if (t.count("domain_right")) cfg.setup.domain_right = as_double(t.at("domain_right"), "[physics].domain_right");
        cfg.setup.final_time = as_double(require(t, "physics", "final_time"), "[physics].final_time");
        const std::string env = t.count("envelope") ? as_string(t.at("envelope"), "[physics].envelope") : "gaussian";
        if (env == "gaussian") {
            GaussianProfile g;
            if (t.count("envelope_sigma")) g.sigma = as_double(t.at("envelope_sigma"), "[physics].envelope_sigma");
            if (t.count("envelope_center")) g.center = as_double(t.at("envelope_center"), "[physics].envelope_center");
            cfg.setup.envelope = g;
        } else if (env == "constant") {
            ConstantProfile c;
            if (t.count("envelope_value")) c.value = as_double(t.at("envelope_value"), "[physics].envelope_value");
            cfg.setup.envelope = c;
        } else if (env == "tabulated") {
            const std::vector<double> re =
                as_double_array(require(t, "physics", "envelope_samples_re"), "[physics].envelope_samples_re");
            std::vector<double> im(re.size(), 0.0);
            if (t.count("envelope_samples_im"))
                im = as_double_array(t.at("envelope_samples_im"), "[physics].envelope_samples_im");
            if (im.size() != re.size()) throw ConfigError("envelope sample arrays differ in length");
            std::vector<Complex> samples(re.size());
            for (std::size_t i = 0; i < re.size(); ++i) samples[i] = Complex(re[i], im[i]);
            if (samples.empty()) throw ConfigError("tabulated envelope needs at least one sample");
            cfg.setup.envelope = TabulatedProfile(std::move(samples));
        } else {
            throw ConfigError("unknown envelope kind '" + env + "'");
        }
        cfg.setup.validate();
    }

    // discretization
    {
        auto it = doc.find("discretization");
        if (it == doc.end()) throw ConfigError("missing [discretization] section");
        const toml::Table& t = it->second;
        const std::string mode = as_string(require(t, "discretization", "mode"), "[discretization].mode");
        if (mode == "direct") {
            cfg.mode = DiscretizationMode::direct;
            reject_unknown(t, "discretization", {"mode", "tau", "h", "tau_coeff", "tau_power"});
            if (t.count("tau")) cfg.tau = as_double(t.at("tau"), "[discretization].tau");
            if (t.count("h")) cfg.h = as_double(t.at("h"), "[discretization].h");
            if (t.count("tau_coeff")) cfg.tau_coeff = as_double(t.at("tau_coeff"), "[discretization].tau_coeff");
            if (t.count("tau_power")) cfg.tau_power = as_double(t.at("tau_power"), "[discretization].tau_power");
            if (cfg.tau <= 0.0 && cfg.tau_coeff <= 0.0)
                throw ConfigError("direct mode needs tau > 0 or a tau_coeff sweep rule");
        } else if (mode == "planner") {
            cfg.mode = DiscretizationMode::planner;
            reject_unknown(t, "discretization",
                           {"mode", "rho", "alpha_branch", "beta_branch", "theta_max", "target_m",
                            "alpha_branch_rule", "tau_over_h"});
            if (t.count("rho")) cfg.rho = as_double(t.at("rho"), "[discretization].rho");
            if (t.count("alpha_branch"))
                cfg.alpha_branch = static_cast<int>(as_int(t.at("alpha_branch"), "[discretization].alpha_branch"));
            if (t.count("beta_branch"))
                cfg.beta_branch = static_cast<int>(as_int(t.at("beta_branch"), "[discretization].beta_branch"));
            if (t.count("theta_max")) cfg.theta_max = as_double(t.at("theta_max"), "[discretization].theta_max");
            if (t.count("target_m")) cfg.target_M = static_cast<int>(as_int(t.at("target_m"), "[discretization].target_m"));
            if (t.count("alpha_branch_rule")) {
                const std::string r = as_string(t.at("alpha_branch_rule"), "[discretization].alpha_branch_rule");
                if (r == "fixed") cfg.alpha_branch_rule = AlphaBranchRule::fixed;
                else if (r == "scale_with_h") cfg.alpha_branch_rule = AlphaBranchRule::scale_with_h;
                else throw ConfigError("unknown alpha_branch_rule '" + r + "'");
            }
            if (t.count("tau_over_h")) cfg.tau_over_h = as_double(t.at("tau_over_h"), "[discretization].tau_over_h");
        } else {
            throw ConfigError("[discretization].mode must be 'direct' or 'planner'");
        }
    }

    // scheme
    {
        auto it = doc.find("scheme");
        if (it == doc.end()) throw ConfigError("missing [scheme] section");
        const toml::Table& t = it->second;
        reject_unknown(t, "scheme",
                       {"name", "cn_tol", "cn_max_iterations", "cn_predictor", "cn_advance", "bootstrap",
                        "blowup_ceiling"});
        const std::string name = as_string(require(t, "scheme", "name"), "[scheme].name");
        if (name == "leapfrog") cfg.scheme = SchemeChoice::leapfrog;
        else if (name == "crank_nicolson") cfg.scheme = SchemeChoice::crank_nicolson;
        else if (name == "both") cfg.scheme = SchemeChoice::both;
        else throw ConfigError("unknown scheme '" + name + "'");
        if (t.count("cn_tol")) cfg.cn.fixed_point_tol = as_double(t.at("cn_tol"), "[scheme].cn_tol");
        if (t.count("cn_max_iterations"))
            cfg.cn.max_iterations = static_cast<int>(as_int(t.at("cn_max_iterations"), "[scheme].cn_max_iterations"));
        if (t.count("cn_predictor")) {
            const std::string p = as_string(t.at("cn_predictor"), "[scheme].cn_predictor");
            if (p == "copy_prev") cfg.cn.predictor = CnPredictor::copy_prev;
            else if (p == "leapfrog_predictor") cfg.cn.predictor = CnPredictor::leapfrog_predictor;
            else throw ConfigError("unknown cn_predictor '" + p + "'");
        }
        if (t.count("cn_advance")) {
            const std::string a = as_string(t.at("cn_advance"), "[scheme].cn_advance");
            if (a == "auto") cfg.cn_advance = CnAdvance::automatic;
            else if (a == "one_step") cfg.cn_advance = CnAdvance::one_step;
            else if (a == "two_step") cfg.cn_advance = CnAdvance::two_step;
            else throw ConfigError("unknown cn_advance '" + a + "'");
        }
        if (t.count("bootstrap")) {
            const std::string b = as_string(t.at("bootstrap"), "[scheme].bootstrap");
            if (b == "cn_half") cfg.bootstrap_mode = BootstrapMode::cn_half;
            else if (b == "dominant_term") cfg.bootstrap_mode = BootstrapMode::dominant_term;
            else throw ConfigError("unknown bootstrap '" + b + "'");
        }
        if (t.count("blowup_ceiling")) cfg.blowup_ceiling = as_double(t.at("blowup_ceiling"), "[scheme].blowup_ceiling");
        if (!(cfg.cn.fixed_point_tol > 0.0)) throw ConfigError("cn_tol must be positive");
        if (cfg.cn.max_iterations < 1) throw ConfigError("cn_max_iterations must be positive");
    }

    // reference
    if (auto it = doc.find("reference"); it != doc.end()) {
        const toml::Table& t = it->second;
        reject_unknown(t, "reference", {"enabled", "m_ref_multiple", "tau_ref"});
        if (t.count("enabled")) cfg.reference_enabled = as_bool(t.at("enabled"), "[reference].enabled");
        if (t.count("m_ref_multiple"))
            cfg.m_ref_multiple = static_cast<int>(as_int(t.at("m_ref_multiple"), "[reference].m_ref_multiple"));
        if (t.count("tau_ref")) cfg.tau_ref = as_double(t.at("tau_ref"), "[reference].tau_ref");
        if (cfg.m_ref_multiple < 1) throw ConfigError("m_ref_multiple must be positive");
        if (!(cfg.tau_ref > 0.0)) throw ConfigError("tau_ref must be positive");
    }

    // output
    if (auto it = doc.find("output"); it != doc.end()) {
        const toml::Table& t = it->second;
        reject_unknown(t, "output", {"stride"});
        if (t.count("stride")) cfg.stride = as_int(t.at("stride"), "[output].stride");
        if (cfg.stride < 1) throw ConfigError("stride must be positive");
    }

    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    return load_config(toml::parse_file(path));
}

} // namespace oscifd
