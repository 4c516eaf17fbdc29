#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "couette/diagnostics.hpp"
#include "couette/errors.hpp"
#include "couette/initial_data.hpp"
#include "couette/multiplier_weights.hpp"
#include "couette/ns_solver.hpp"

namespace couette {

// ---------------------------------------------------------------------------
// Flat config text: one "key = value" per line, '#' starts a comment.
// Doubles accept a trailing "*pi" (or a bare "pi"); lists are comma separated.

using ConfigEntries = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline ConfigEntries parse_config_text(const std::string& text) {
    ConfigEntries out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
        if (out.count(key)) throw ValidationError("config line " + std::to_string(lineno) + ": duplicate key " + key);
        out[key] = value;
    }
    return out;
}

inline ConfigEntries read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

inline double parse_double(const std::string& key, std::string s) {
    s = detail::trim(s);
    double scale = 1.0;
    if (s == "pi") return std::numbers::pi;
    if (s.size() > 3 && s.compare(s.size() - 3, 3, "*pi") == 0) {
        scale = std::numbers::pi;
        s = detail::trim(s.substr(0, s.size() - 3));
    }
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ValidationError("config key " + key + ": '" + s + "' is not a number");
    return v * scale;
}

inline std::int64_t parse_int(const std::string& key, const std::string& s) {
    std::int64_t v = 0;
    const auto t = detail::trim(s);
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ValidationError("config key " + key + ": '" + s + "' is not an integer");
    return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    const auto t = detail::trim(s);
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ValidationError("config key " + key + ": '" + s + "' is not an unsigned integer");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ValidationError("config key " + key + ": '" + s + "' is not a boolean");
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ','))
        if (!detail::trim(item).empty()) out.push_back(parse_double(key, item));
    return out;
}

inline std::string format_double_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t n = 0; n < v.size(); ++n) s += (n ? ", " : "") + detail::format_double(v[n]);
    return s;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Single-run configuration.

enum class DataFamily { smallness, single_k };

inline const char* to_string(DataFamily f) { return f == DataFamily::smallness ? "smallness" : "single_k"; }

struct RunConfig {
    int nx = 32;
    int ny = 64;
    double lx = 4.0 * std::numbers::pi;
    double ly = 2.0 * std::numbers::pi;

    SolverConfig solver{};
    MultiplierParams weights{};

    DataFamily family = DataFamily::smallness;
    InitialDataSpec data{};
    int k_mode = 1;  ///< single_k family only

    double probe_interval = 0.5;
    ClassifyThresholds thresholds{};
    RateKind rate = RateKind::lambda;
    bool checkpoints = false;  ///< write a checkpoint at every probe time

    FrequencyGrid grid() const { return make_grid(nx, ny, lx, ly); }

    MultiplierParams multiplier_params() const {
        MultiplierParams p = weights;
        p.nu = solver.nu;
        return p;
    }

    void validate() const {
        const auto g = grid();
        SolverConfig checked = solver;
        if (checked.dt == 0.0) checked.dt = 1.0;  // 0 selects the automatic step
        checked.validate(g);
        multiplier_params().validate();
        if (!(probe_interval >= 0.0)) throw ValidationError("probe.interval must be >= 0");
        if (!(thresholds.G > 0.0 && thresholds.G_hi >= thresholds.G))
            throw ValidationError("classify thresholds need 0 < G <= G_hi");
        if (family == DataFamily::single_k && (k_mode <= 0 || k_mode >= nx / 2))
            throw ValidationError("data.k_mode out of range");
    }

    SpectralField initial_field() const {
        const auto g = grid();
        if (family == DataFamily::single_k) return make_single_k_gaussian(g, k_mode, data.sigma_xi, data.amplitude);
        return make_initial_data(g, data);
    }
};

namespace detail {

struct ConfigKey {
    const char* name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

inline const std::vector<ConfigKey>& run_config_keys() {
    using R = RunConfig;
    static const std::vector<ConfigKey> keys = {
        {"grid.nx", [](const R& c) { return std::to_string(c.nx); },
         [](R& c, const std::string& v) { c.nx = static_cast<int>(parse_int("grid.nx", v)); }},
        {"grid.ny", [](const R& c) { return std::to_string(c.ny); },
         [](R& c, const std::string& v) { c.ny = static_cast<int>(parse_int("grid.ny", v)); }},
        {"grid.lx", [](const R& c) { return format_double(c.lx); },
         [](R& c, const std::string& v) { c.lx = parse_double("grid.lx", v); }},
        {"grid.ly", [](const R& c) { return format_double(c.ly); },
         [](R& c, const std::string& v) { c.ly = parse_double("grid.ly", v); }},
        {"solver.nu", [](const R& c) { return format_double(c.solver.nu); },
         [](R& c, const std::string& v) { c.solver.nu = parse_double("solver.nu", v); }},
        {"solver.dt", [](const R& c) { return format_double(c.solver.dt); },
         [](R& c, const std::string& v) { c.solver.dt = parse_double("solver.dt", v); }},
        {"solver.t_max", [](const R& c) { return format_double(c.solver.t_max); },
         [](R& c, const std::string& v) { c.solver.t_max = parse_double("solver.t_max", v); }},
        {"solver.dealias", [](const R& c) { return format_double(c.solver.dealias); },
         [](R& c, const std::string& v) { c.solver.dealias = parse_double("solver.dealias", v); }},
        {"solver.mode", [](const R& c) { return std::string(to_string(c.solver.mode)); },
         [](R& c, const std::string& v) { c.solver.mode = solver_mode_from_string(v); }},
        {"solver.shift_policy", [](const R& c) { return std::string(to_string(c.solver.shift_policy)); },
         [](R& c, const std::string& v) {
             if (v == "abort") c.solver.shift_policy = ShiftPolicy::abort;
             else if (v == "truncate") c.solver.shift_policy = ShiftPolicy::truncate;
             else throw ValidationError("solver.shift_policy must be abort or truncate");
         }},
        {"solver.cfl_limit", [](const R& c) { return format_double(c.solver.cfl_limit); },
         [](R& c, const std::string& v) { c.solver.cfl_limit = parse_double("solver.cfl_limit", v); }},
        {"weights.c", [](const R& c) { return format_double(c.weights.c); },
         [](R& c, const std::string& v) { c.weights.c = parse_double("weights.c", v); }},
        {"weights.eps", [](const R& c) { return format_double(c.weights.eps); },
         [](R& c, const std::string& v) { c.weights.eps = parse_double("weights.eps", v); }},
        {"weights.kappa", [](const R& c) { return format_double(c.weights.kappa); },
         [](R& c, const std::string& v) { c.weights.kappa = parse_double("weights.kappa", v); }},
        {"weights.delta", [](const R& c) { return format_double(c.weights.delta); },
         [](R& c, const std::string& v) { c.weights.delta = parse_double("weights.delta", v); }},
        {"data.family", [](const R& c) { return std::string(to_string(c.family)); },
         [](R& c, const std::string& v) {
             if (v == "smallness") c.family = DataFamily::smallness;
             else if (v == "single_k") c.family = DataFamily::single_k;
             else throw ValidationError("data.family must be smallness or single_k");
         }},
        {"data.amplitude", [](const R& c) { return format_double(c.data.amplitude); },
         [](R& c, const std::string& v) { c.data.amplitude = parse_double("data.amplitude", v); }},
        {"data.seed", [](const R& c) { return std::to_string(c.data.seed); },
         [](R& c, const std::string& v) { c.data.seed = parse_u64("data.seed", v); }},
        {"data.sigma_k", [](const R& c) { return format_double(c.data.sigma_k); },
         [](R& c, const std::string& v) { c.data.sigma_k = parse_double("data.sigma_k", v); }},
        {"data.sigma_xi", [](const R& c) { return format_double(c.data.sigma_xi); },
         [](R& c, const std::string& v) { c.data.sigma_xi = parse_double("data.sigma_xi", v); }},
        {"data.random_phase", [](const R& c) { return std::string(c.data.random_phase ? "true" : "false"); },
         [](R& c, const std::string& v) { c.data.random_phase = parse_bool("data.random_phase", v); }},
        {"data.k_mode", [](const R& c) { return std::to_string(c.k_mode); },
         [](R& c, const std::string& v) { c.k_mode = static_cast<int>(parse_int("data.k_mode", v)); }},
        {"probe.interval", [](const R& c) { return format_double(c.probe_interval); },
         [](R& c, const std::string& v) { c.probe_interval = parse_double("probe.interval", v); }},
        {"classify.G", [](const R& c) { return format_double(c.thresholds.G); },
         [](R& c, const std::string& v) { c.thresholds.G = parse_double("classify.G", v); }},
        {"classify.G_hi", [](const R& c) { return format_double(c.thresholds.G_hi); },
         [](R& c, const std::string& v) { c.thresholds.G_hi = parse_double("classify.G_hi", v); }},
        {"classify.rate", [](const R& c) { return std::string(to_string(c.rate)); },
         [](R& c, const std::string& v) {
             if (v == "lambda") c.rate = RateKind::lambda;
             else if (v == "two_thirds") c.rate = RateKind::two_thirds;
             else throw ValidationError("classify.rate must be lambda or two_thirds");
         }},
        {"output.checkpoints", [](const R& c) { return std::string(c.checkpoints ? "true" : "false"); },
         [](R& c, const std::string& v) { c.checkpoints = parse_bool("output.checkpoints", v); }},
    };
    return keys;
}

}  // namespace detail

/// Applies the run keys present in entries and removes them from it.
inline void apply_run_entries(RunConfig& cfg, ConfigEntries& entries) {
    for (const auto& key : detail::run_config_keys()) {
        const auto it = entries.find(key.name);
        if (it == entries.end()) continue;
        key.set(cfg, it->second);
        entries.erase(it);
    }
}

inline void reject_unknown(const ConfigEntries& entries) {
    if (!entries.empty()) throw ValidationError("unknown config key '" + entries.begin()->first + "'");
}

inline RunConfig run_config_from_entries(ConfigEntries entries) {
    RunConfig cfg;
    apply_run_entries(cfg, entries);
    reject_unknown(entries);
    return cfg;
}

/// Canonical text: every key, fixed order, round-trip exact numbers.
inline std::string serialize(const RunConfig& cfg) {
    std::string out;
    for (const auto& key : detail::run_config_keys()) out += std::string(key.name) + " = " + key.get(cfg) + "\n";
    return out;
}

inline std::string run_hash(const RunConfig& cfg) { return hex64(fnv1a64(serialize(cfg))); }

}  // namespace couette
