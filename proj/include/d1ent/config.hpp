// config.hpp: scenario configuration files.
//
// Flat "key = value" lines grouped under [section] headers; '#' starts a
// comment. Lists are comma separated, and "start:stop:step" expands to an
// inclusive range. Unknown sections and keys are rejected.
//
//   [model]    delta, s, omega_c, n_modes, dt, t_max, output_every
//   [initial]  kind (anti_bell|bell|mixed|custom), frame (RSB|SB),
//              custom_re, custom_im (4 amplitudes on ++, +-, -+, --)
//   [sweep]    alpha, and exactly one of a / a_squared (not for custom)
//   [run]      method (D1|RWA|both), output, workers
//   [oracle]   n_modes, n_max, t_max

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "d1ent/composer.hpp"
#include "d1ent/model.hpp"

namespace d1ent {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MethodChoice { D1, RWA, Both };

struct OracleSettings {
    std::size_t n_modes{3};
    std::size_t n_max{8};
    double t_max{50.0};
};

struct ScenarioConfig {
    ModelParams model;
    double output_every{0.2};
    InitialSpec initial;
    MethodChoice method{MethodChoice::D1};
    std::vector<double> alphas;
    std::vector<double> a_values;  // amplitude a, whichever key was used
    std::string output{"scenario"};
    std::size_t workers{1};
    OracleSettings oracle;
    std::vector<std::string> warnings;

    std::vector<Method> methods() const {
        switch (method) {
            case MethodChoice::D1: return {Method::D1};
            case MethodChoice::RWA: return {Method::RWA};
            case MethodChoice::Both: return {Method::D1, Method::RWA};
        }
        return {};
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(std::string_view text, const std::string& where) {
    text = trim(text);
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || text.empty())
        throw ConfigError(where + ": expected a number, got '" + std::string(text) + "'");
    return v;
}

inline std::vector<double> parse_list(std::string_view text, const std::string& where) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (item.empty()) throw ConfigError(where + ": empty list element");
        if (item.find(':') != std::string_view::npos) {
            const auto c1 = item.find(':');
            const auto c2 = item.find(':', c1 + 1);
            if (c2 == std::string_view::npos) throw ConfigError(where + ": range must be start:stop:step");
            const double lo = parse_number(item.substr(0, c1), where);
            const double hi = parse_number(item.substr(c1 + 1, c2 - c1 - 1), where);
            const double step = parse_number(item.substr(c2 + 1), where);
            if (!(step > 0.0) || hi < lo) throw ConfigError(where + ": range needs step > 0 and stop >= start");
            const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
            for (long k = 0; k <= n; ++k) out.push_back(std::min(lo + static_cast<double>(k) * step, hi));
        } else {
            out.push_back(parse_number(item, where));
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::size_t parse_count(std::string_view text, const std::string& where) {
    const double v = parse_number(text, where);
    if (v < 0.0 || v != std::floor(v)) throw ConfigError(where + ": expected a nonnegative integer");
    return static_cast<std::size_t>(v);
}

struct Entry {
    std::string value;
    int line;
};

}  // namespace detail

/// Parses and validates configuration text. `origin` prefixes diagnostics.
inline ScenarioConfig parse_config(const std::string& text, const std::string& origin = "config") {
    static const std::map<std::string, std::set<std::string>> schema{
        {"model", {"delta", "s", "omega_c", "n_modes", "dt", "t_max", "output_every"}},
        {"initial", {"kind", "frame", "custom_re", "custom_im"}},
        {"sweep", {"alpha", "a", "a_squared"}},
        {"run", {"method", "output", "workers"}},
        {"oracle", {"n_modes", "n_max", "t_max"}},
    };
    std::map<std::string, detail::Entry> entries;  // "section.key"
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        auto line = detail::trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (!schema.contains(section)) throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside of a section");
        if (!schema.at(section).contains(key)) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
        const std::string full = section + "." + key;
        if (entries.contains(full)) throw ConfigError(where + ": duplicate key '" + key + "'");
        if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
        entries[full] = {value, line_no};
    }

    auto where = [&](const std::string& full) { return origin + ":" + std::to_string(entries.at(full).line) + " (" + full + ")"; };
    auto num = [&](const std::string& full, double& dst) {
        if (entries.contains(full)) dst = detail::parse_number(entries.at(full).value, where(full));
    };
    auto count = [&](const std::string& full, std::size_t& dst) {
        if (entries.contains(full)) dst = detail::parse_count(entries.at(full).value, where(full));
    };
    auto word = [&](const std::string& full) -> std::string { return entries.contains(full) ? entries.at(full).value : ""; };

    ScenarioConfig cfg;
    num("model.delta", cfg.model.delta);
    num("model.s", cfg.model.s);
    num("model.omega_c", cfg.model.omega_c);
    count("model.n_modes", cfg.model.n_modes);
    num("model.dt", cfg.model.dt);
    num("model.t_max", cfg.model.t_max);
    num("model.output_every", cfg.output_every);

    const std::string kind = word("initial.kind");
    if (kind.empty() || kind == "anti_bell") cfg.initial.kind = InitialKind::AntiBell;
    else if (kind == "bell") cfg.initial.kind = InitialKind::Bell;
    else if (kind == "mixed") cfg.initial.kind = InitialKind::Mixed;
    else if (kind == "custom") cfg.initial.kind = InitialKind::Custom;
    else throw ConfigError(where("initial.kind") + ": kind must be anti_bell, bell, mixed or custom");

    const std::string frame = word("initial.frame");
    if (frame.empty() || frame == "RSB") cfg.initial.frame = Frame::RSB;
    else if (frame == "SB") cfg.initial.frame = Frame::SB;
    else throw ConfigError(where("initial.frame") + ": frame must be RSB or SB");

    const std::string method = word("run.method");
    if (method.empty() || method == "D1") cfg.method = MethodChoice::D1;
    else if (method == "RWA") cfg.method = MethodChoice::RWA;
    else if (method == "both") cfg.method = MethodChoice::Both;
    else throw ConfigError(where("run.method") + ": method must be D1, RWA or both");

    if (entries.contains("run.output")) cfg.output = entries.at("run.output").value;
    count("run.workers", cfg.workers);
    count("oracle.n_modes", cfg.oracle.n_modes);
    count("oracle.n_max", cfg.oracle.n_max);
    num("oracle.t_max", cfg.oracle.t_max);

    if (!entries.contains("sweep.alpha")) throw ConfigError(origin + ": missing required key sweep.alpha");
    cfg.alphas = detail::parse_list(entries.at("sweep.alpha").value, where("sweep.alpha"));

    const bool has_a = entries.contains("sweep.a");
    const bool has_a2 = entries.contains("sweep.a_squared");
    if (cfg.initial.kind == InitialKind::Custom) {
        if (has_a || has_a2) throw ConfigError(origin + ": custom initial states take no a sweep");
        if (!entries.contains("initial.custom_re")) throw ConfigError(origin + ": custom kind requires initial.custom_re");
        const auto re = detail::parse_list(entries.at("initial.custom_re").value, where("initial.custom_re"));
        std::vector<double> im(4, 0.0);
        if (entries.contains("initial.custom_im"))
            im = detail::parse_list(entries.at("initial.custom_im").value, where("initial.custom_im"));
        if (re.size() != 4 || im.size() != 4) throw ConfigError(origin + ": custom amplitudes need exactly 4 entries");
        Eigen::Vector4cd amps;
        for (int i = 0; i < 4; ++i) amps[i] = Complex(re[static_cast<std::size_t>(i)], im[static_cast<std::size_t>(i)]);
        if (std::abs(amps.squaredNorm() - 1.0) > 1e-6)
            throw ConfigError(origin + ": invariant violated: custom state must have unit norm");
        cfg.initial.custom = custom_state(amps.normalized());
        cfg.a_values = {1.0};
    } else {
        if (entries.contains("initial.custom_re") || entries.contains("initial.custom_im"))
            throw ConfigError(origin + ": custom amplitudes given for a non-custom kind");
        if (has_a == has_a2) throw ConfigError(origin + ": exactly one of sweep.a or sweep.a_squared is required");
        const std::string key = has_a ? "sweep.a" : "sweep.a_squared";
        auto vals = detail::parse_list(entries.at(key).value, where(key));
        for (double v : vals)
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(where(key) + ": invariant violated: a must lie in [0, 1]");
        if (has_a2)
            for (double& v : vals) v = std::sqrt(v);
        cfg.a_values = std::move(vals);
    }

    // Invariants.
    if (cfg.alphas.empty() || cfg.a_values.empty()) throw ConfigError(origin + ": invariant violated: sweep lists must be nonempty");
    for (double a : cfg.alphas)
        if (!(a >= 0.0)) throw ConfigError(origin + ": invariant violated: alpha must be >= 0");
    try {
        ModelParams probe = cfg.model;
        probe.alpha = cfg.alphas.front();
        validate(probe);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!(cfg.output_every > 0.0) || cfg.output_every > cfg.model.t_max)
        throw ConfigError(origin + ": invariant violated: 0 < output_every <= t_max");
    const double ratio = cfg.output_every / cfg.model.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ConfigError(origin + ": invariant violated: output_every must be an integer multiple of dt");
    if (cfg.workers < 1) throw ConfigError(origin + ": invariant violated: workers must be >= 1");
    if (cfg.output.empty() || cfg.output.find('/') != std::string::npos)
        throw ConfigError(origin + ": output must be a plain file prefix");
    if (cfg.method != MethodChoice::D1 && cfg.initial.frame != Frame::RSB)
        throw ConfigError(origin + ": invariant violated: the RWA method requires frame = RSB");
    if (cfg.oracle.n_modes < 1 || cfg.oracle.n_modes > 5 || cfg.oracle.n_max < 1 || cfg.oracle.n_max > 8)
        throw ConfigError(origin + ": invariant violated: oracle needs 1..5 modes and n_max 1..8");
    if (!(cfg.oracle.t_max > 0.0)) throw ConfigError(origin + ": invariant violated: oracle t_max must be > 0");
    if (exceeds_recurrence(cfg.model))
        cfg.warnings.push_back("t_max " + std::to_string(cfg.model.t_max) + " reaches the bath recurrence time " +
                               std::to_string(recurrence_time(cfg.model)) + "; raise n_modes");
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace d1ent
