// This file is part of aoisched, a solver and simulator for status-update
// transmission scheduling that trades information freshness against power.
//
// MIT License
//
// Copyright (c) 2026 aoisched contributors
//
// Permission is hereby granted, free of charge, to any person obtaining a copy
// of this software and associated documentation files (the "Software"), to deal
// in the Software without restriction, including without limitation the rights
// to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
// copies of the Software, and to permit persons to whom the Software is
// furnished to do so, subject to the following conditions:
//
// The above copyright notice and this permission notice shall be included in
// all copies or substantial portions of the Software.
//
// THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
// IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
// FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
// AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
// LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
// OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN
// THE SOFTWARE.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aoisched/channel.hpp"
#include "aoisched/cmdp.hpp"
#include "aoisched/errors.hpp"

namespace aoisched {

/// Everything one experiment needs: channel quantization, system constants,
/// solver knobs, simulation defaults, and an optional sweep description.
/// Defaults reproduce the reference configuration (128 levels, M=4, age cap
/// 100, rate 1, budget -3 dBw, alpha 0.5, omega 1, gamma 0.999).
struct ExperimentSpec {
    std::string channel_name = "exponential_unit_mean";
    int levels = 128;
    SystemConfig system{};

    long long horizon = 1'000'000;
    std::uint64_t seed = 1;
    int replicas = 5;
    bool truncate_age = false;

    // Sweep section; `sweep_variable` empty means no sweep was configured.
    std::string sweep_variable{};
    std::vector<double> grid{};
    std::vector<std::string> policies{"optimal", "retransmission", "generation"};
    bool quantized_baselines = false;

    FadingDistribution distribution() const {
        if (channel_name == "exponential_unit_mean" || channel_name == "rayleigh_unit_mean")
            return rayleigh_unit_mean();
        throw ConfigError("unknown channel '" + channel_name +
                          "' (supported: exponential_unit_mean)");
    }

    ChannelModel build_channel() const {
        return quantize_channel(distribution(), levels, system.rate);
    }

    void validate() const;
    std::string echo() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double parse_number(const std::string& value, const std::string& key) {
    const std::string t = trim(value);
    if (t.empty()) throw ConfigError("empty value for '" + key + "'");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        throw ConfigError("could not parse number '" + t + "' for '" + key + "'");
    return v;
}

inline long long parse_integer(const std::string& value, const std::string& key) {
    const std::string t = trim(value);
    if (t.empty()) throw ConfigError("empty value for '" + key + "'");
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size())
        throw ConfigError("could not parse integer '" + t + "' for '" + key + "'");
    return v;
}

inline bool parse_bool(const std::string& value, const std::string& key) {
    const std::string t = lower(trim(value));
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ConfigError("could not parse boolean '" + value + "' for '" + key + "'");
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(value);
    while (std::getline(ss, cur, ',')) {
        const std::string t = trim(cur);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace detail

/// Parse a power setting: a number followed by a mandatory unit suffix,
/// either "w" (watts) or "dbw".  Returns watts.
inline double parse_power_setting(const std::string& value, const std::string& key) {
    const std::string t = detail::trim(value);
    char* end = nullptr;
    const double num = std::strtod(t.c_str(), &end);
    if (end == t.c_str())
        throw ConfigError("could not parse power '" + t + "' for '" + key + "'");
    const std::string unit = detail::lower(detail::trim(std::string(end)));
    if (unit == "w") return num;
    if (unit == "dbw") return dbw_to_watt(num);
    throw ConfigError("power value for '" + key +
                      "' needs an explicit unit suffix 'w' or 'dbw', got '" + t + "'");
}

inline void ExperimentSpec::validate() const {
    if (levels < 1) throw ConfigError("'levels' must be >= 1");
    if (horizon < 1) throw ConfigError("'horizon' must be >= 1");
    if (replicas < 1) throw ConfigError("'replicas' must be >= 1");
    distribution();  // throws on unknown channel names
    try {
        system.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!sweep_variable.empty()) {
        static const std::vector<std::string> kVars = {"c_max_dbw", "omega", "gamma", "alpha"};
        if (std::find(kVars.begin(), kVars.end(), sweep_variable) == kVars.end())
            throw ConfigError("unknown sweep 'variable' '" + sweep_variable +
                              "' (supported: c_max_dbw, omega, gamma, alpha)");
        if (grid.empty()) throw ConfigError("sweep 'grid' must be nonempty");
        for (size_t i = 1; i < grid.size(); ++i) {
            const bool up = grid[1] > grid[0];
            if ((up && grid[i] <= grid[i - 1]) || (!up && grid[i] >= grid[i - 1]))
                throw ConfigError("sweep 'grid' must be strictly monotone");
        }
        if (policies.empty()) throw ConfigError("sweep 'policies' must be nonempty");
        for (const std::string& p : policies) {
            if (p != "optimal" && p != "retransmission" && p != "generation")
                throw ConfigError("unknown policy '" + p +
                                  "' in sweep 'policies' (supported: optimal, "
                                  "retransmission, generation)");
            if (std::count(policies.begin(), policies.end(), p) != 1)
                throw ConfigError("duplicate policy '" + p + "' in sweep 'policies'");
        }
    } else if (!grid.empty()) {
        throw ConfigError("sweep 'grid' given without a 'variable'");
    }
}

/// Canonical listing of every setting, defaults included, so runs can log
/// exactly what they used.
inline std::string ExperimentSpec::echo() const {
    using detail::format_number;
    std::string s;
    s += "[channel]\n";
    s += "channel = " + channel_name + "\n";
    s += "levels = " + std::to_string(levels) + "\n";
    s += "rate = " + format_number(system.rate) + "\n";
    s += "[system]\n";
    s += "max_rounds = " + std::to_string(system.max_rounds) + "\n";
    s += "age_cap = " + std::to_string(system.age_cap) + "\n";
    s += "power_budget = " + format_number(system.power_budget) + " w\n";
    s += "alpha = " + format_number(system.sensing_ratio) + "\n";
    s += "# sensing_power = " + format_number(system.sensing_power()) +
         " w (alpha * power_budget)\n";
    s += "omega = " + format_number(system.power_weight) + "\n";
    s += "[solver]\n";
    s += "gamma = " + format_number(system.discount) + "\n";
    s += "eta_tol = " + format_number(system.eta_tol) + "\n";
    s += "value_tol = " + format_number(system.value_tol) + "\n";
    s += "max_iterations = " + std::to_string(system.max_iterations) + "\n";
    s += std::string("charge_sensing_on_discard = ") +
         (system.charge_sensing_on_discard ? "true" : "false") + "\n";
    s += "[sim]\n";
    s += "horizon = " + std::to_string(horizon) + "\n";
    s += "seed = " + std::to_string(seed) + "\n";
    s += "replicas = " + std::to_string(replicas) + "\n";
    s += std::string("truncate_age = ") + (truncate_age ? "true" : "false") + "\n";
    if (!sweep_variable.empty()) {
        s += "[sweep]\n";
        s += "variable = " + sweep_variable + "\n";
        s += "grid = ";
        for (size_t i = 0; i < grid.size(); ++i)
            s += (i ? ", " : "") + format_number(grid[i]);
        s += "\n";
        s += "policies = ";
        for (size_t i = 0; i < policies.size(); ++i) s += (i ? ", " : "") + policies[i];
        s += "\n";
        s += std::string("baseline_power = ") +
             (quantized_baselines ? "quantized" : "continuous") + "\n";
    }
    return s;
}

/// Parse the key = value configuration text.  Sections are [channel],
/// [system], [solver], [sim], and [sweep]; '#' and ';' start comments.
/// Unknown sections or keys are errors, never silently ignored.
inline ExperimentSpec parse_config_text(const std::string& text) {
    using namespace detail;
    ExperimentSpec spec;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (section != "channel" && section != "system" && section != "solver" &&
                section != "sim" && section != "sweep")
                throw ConfigError("unknown section [" + section + "] at line " +
                                  std::to_string(lineno));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value' at line " + std::to_string(lineno));
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("key '" + key + "' appears before any [section] at line " +
                              std::to_string(lineno));

        auto unknown = [&]() {
            throw ConfigError("unknown key '" + key + "' in [" + section + "]");
        };
        if (section == "channel") {
            if (key == "channel") spec.channel_name = lower(value);
            else if (key == "levels") spec.levels = static_cast<int>(parse_integer(value, key));
            else if (key == "rate") spec.system.rate = parse_number(value, key);
            else unknown();
        } else if (section == "system") {
            if (key == "max_rounds")
                spec.system.max_rounds = static_cast<int>(parse_integer(value, key));
            else if (key == "age_cap")
                spec.system.age_cap = static_cast<int>(parse_integer(value, key));
            else if (key == "power_budget")
                spec.system.power_budget = parse_power_setting(value, key);
            else if (key == "alpha") spec.system.sensing_ratio = parse_number(value, key);
            else if (key == "omega") spec.system.power_weight = parse_number(value, key);
            else unknown();
        } else if (section == "solver") {
            if (key == "gamma") spec.system.discount = parse_number(value, key);
            else if (key == "eta_tol") spec.system.eta_tol = parse_number(value, key);
            else if (key == "value_tol") spec.system.value_tol = parse_number(value, key);
            else if (key == "max_iterations")
                spec.system.max_iterations = parse_integer(value, key);
            else if (key == "charge_sensing_on_discard")
                spec.system.charge_sensing_on_discard = parse_bool(value, key);
            else unknown();
        } else if (section == "sim") {
            if (key == "horizon") spec.horizon = parse_integer(value, key);
            else if (key == "seed")
                spec.seed = static_cast<std::uint64_t>(parse_integer(value, key));
            else if (key == "replicas")
                spec.replicas = static_cast<int>(parse_integer(value, key));
            else if (key == "truncate_age") spec.truncate_age = parse_bool(value, key);
            else unknown();
        } else {  // sweep
            if (key == "variable") spec.sweep_variable = lower(value);
            else if (key == "grid") {
                spec.grid.clear();
                for (const std::string& item : split_list(value))
                    spec.grid.push_back(parse_number(item, key));
            } else if (key == "policies") {
                spec.policies = split_list(value);
                for (std::string& p : spec.policies) p = lower(p);
            } else if (key == "baseline_power") {
                const std::string v = lower(value);
                if (v == "continuous") spec.quantized_baselines = false;
                else if (v == "quantized") spec.quantized_baselines = true;
                else
                    throw ConfigError(
                        "'baseline_power' must be 'continuous' or 'quantized', got '" + value +
                        "'");
            } else unknown();
        }
    }
    spec.validate();
    return spec;
}

/// Load and validate a configuration file.  Missing/unreadable file is an
/// I/O error; malformed content is a configuration error.
inline ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading config file '" + path + "'");
    return parse_config_text(ss.str());
}

} // namespace aoisched
