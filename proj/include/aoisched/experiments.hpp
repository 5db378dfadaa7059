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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aoisched/chain.hpp"
#include "aoisched/channel.hpp"
#include "aoisched/cmdp.hpp"
#include "aoisched/config.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/policy.hpp"
#include "aoisched/simulator.hpp"
#include "aoisched/solver.hpp"

namespace aoisched {

/// Apply one grid value of the sweep variable to a base configuration.
inline SystemConfig apply_sweep_value(SystemConfig base, const std::string& variable,
                                      double value) {
    if (variable == "c_max_dbw") base.power_budget = dbw_to_watt(value);
    else if (variable == "omega") base.power_weight = value;
    else if (variable == "gamma") base.discount = value;
    else if (variable == "alpha") base.sensing_ratio = value;
    else throw ConfigError("unknown sweep variable '" + variable + "'");
    return base;
}

/// Build one of the named reference policies at the configured budget.
inline PolicyTable make_baseline(const std::string& name, const StateSpace& space,
                                 const ChannelModel& model, const FadingDistribution& dist,
                                 const SystemConfig& cfg, bool quantized) {
    const double watts = cfg.power_budget;
    if (name == "generation")
        return quantized ? baseline_generation_quantized(watts, model, space, cfg)
                         : baseline_generation(watts, dist, space, cfg);
    if (name == "retransmission")
        return quantized ? baseline_retransmission_quantized(watts, model, space, cfg)
                         : baseline_retransmission(watts, dist, space, cfg);
    throw ConfigError("unknown baseline policy '" + name + "'");
}

namespace detail {

inline std::string csv_num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr ms;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) ms.mean += x;
    ms.mean /= n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
        ms.stderr_ = std::sqrt(ss / (n * (n - 1.0)));
    }
    return ms;
}

} // namespace detail

inline const char* sweep_csv_header() {
    return "sweep_value,policy,analytic_age,analytic_transmit_power,analytic_total_power,"
           "analytic_efficiency,sim_age_mean,sim_age_stderr,sim_efficiency_mean,"
           "sim_efficiency_stderr,eta,xi,status";
}

struct SweepOptions {
    bool resume = true;
    std::ostream* log = nullptr;
};

struct SweepResult {
    std::vector<std::string> lines;  // data rows, grid-major then policy order
    std::string csv;                 // header + rows, as written to the output file
    int resumed_rows = 0;
};

namespace detail {

/// One fully formatted sweep row.  Solver failures flag the row and leave the
/// numeric cells empty so the sweep can continue.
inline std::string compute_sweep_row(const ExperimentSpec& spec, double value,
                                     const std::string& policy, const StateSpace& space,
                                     const ChannelModel& model,
                                     const FadingDistribution& dist) {
    const SystemConfig cfg = apply_sweep_value(spec.system, spec.sweep_variable, value);
    std::string row = csv_num(value) + "," + policy + ",";
    try {
        Metrics analytic;
        std::string eta_cell, xi_cell;
        PolicyTable sim_minus, sim_plus;
        double redraw = 1.0;
        bool mixed = false;
        bool sim_ok = true;
        std::string sim_note;

        if (policy == "optimal") {
            const LagrangianSolution sol = solve_cmdp(space, model, cfg);
            analytic = sol.mixed;
            eta_cell = csv_num(0.5 * (sol.eta_minus + sol.eta_plus));
            xi_cell = csv_num(sol.xi);
            sim_minus = sol.table_minus;
            sim_plus = sol.table_plus;
            if (sol.constraint_active && sol.xi < 1.0) {
                mixed = true;
                try {
                    redraw = mixture_redraw_probability(
                        sol.xi, delivery_rate(sol.pi_minus, sol.table_minus),
                        delivery_rate(sol.pi_plus, sol.table_plus));
                } catch (const std::invalid_argument&) {
                    sim_ok = false;  // a never-delivering endpoint cannot be mixed
                    sim_note = "no_renewals";
                }
            }
        } else {
            sim_minus = make_baseline(policy, space, model, dist, cfg,
                                      spec.quantized_baselines);
            sim_plus = sim_minus;
            const std::vector<double> pi = steady_state(induced_chain(sim_minus, space, cfg));
            analytic = average_metrics(pi, sim_minus, space, cfg);
        }

        std::vector<double> ages, psis;
        if (sim_ok) {
            for (int r = 0; r < spec.replicas; ++r) {
                SimOptions so;
                so.horizon = spec.horizon;
                so.seed = spec.seed + static_cast<std::uint64_t>(r);
                so.truncate_age = spec.truncate_age;
                const SimulationStats st =
                    mixed ? simulate_mixed(sim_minus, sim_plus, redraw, space, dist, cfg, so)
                          : simulate(sim_minus, space, dist, cfg, so);
                ages.push_back(st.time_avg_age);
                psis.push_back(st.energy_efficiency);
            }
        }

        row += csv_num(analytic.avg_age) + "," + csv_num(analytic.avg_transmit_power) + "," +
               csv_num(analytic.avg_total_power) + "," + csv_num(analytic.energy_efficiency) +
               ",";
        if (sim_ok) {
            const MeanStderr a = mean_stderr(ages);
            const MeanStderr p = mean_stderr(psis);
            row += csv_num(a.mean) + "," + csv_num(a.stderr_) + "," + csv_num(p.mean) + "," +
                   csv_num(p.stderr_) + ",";
        } else {
            row += ",,,,";
        }
        row += eta_cell + "," + xi_cell + ",";
        row += sim_ok ? "ok" : ("ok_no_sim:" + sim_note);
    } catch (const SolverError&) {
        row += ",,,,,,,,,,solver_error";
    }
    return row;
}

} // namespace detail

/// Run the configured sweep: one row per (grid value, policy), rows in grid
/// order.  Output is byte-stable given the same spec and seeds.  When
/// `out_path` is nonempty the CSV is written there and a side file
/// `<out_path>.partial` makes the run resumable per row: rerunning after an
/// interruption recomputes only missing rows, then the partial file is
/// removed.  A solver failure flags its row and the sweep continues.
inline SweepResult run_sweep(const ExperimentSpec& spec, const std::string& out_path,
                             const SweepOptions& options = {}) {
    spec.validate();
    if (spec.sweep_variable.empty())
        throw ConfigError("run_sweep: the config has no [sweep] section");
    // Every grid point must produce a valid configuration before any work starts.
    for (double v : spec.grid) {
        try {
            apply_sweep_value(spec.system, spec.sweep_variable, v).validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("sweep grid value " + detail::csv_num(v) +
                              " yields an invalid config: " + e.what());
        }
    }

    const StateSpace space = build_state_space(spec.system.max_rounds, spec.system.age_cap);
    const ChannelModel model = spec.build_channel();
    const FadingDistribution dist = spec.distribution();

    const std::string fingerprint_src = spec.echo();
    char fp[32];
    std::snprintf(fp, sizeof fp, "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a(fingerprint_src)));
    const std::string partial_path = out_path.empty() ? "" : out_path + ".partial";

    // Load rows already computed by an interrupted run with the same spec.
    std::map<std::string, std::string> done;  // "<grid_idx>|<policy>" -> row
    if (options.resume && !partial_path.empty()) {
        std::ifstream in(partial_path);
        if (in) {
            std::string line;
            bool match = false;
            if (std::getline(in, line))
                match = line == ("# sweep partial fingerprint=" + std::string(fp));
            while (match && std::getline(in, line)) {
                const size_t bar = line.find('|');
                if (bar == std::string::npos) continue;
                done[line.substr(0, bar)] = line.substr(bar + 1);
            }
        }
    }

    std::ofstream partial;
    if (!partial_path.empty()) {
        partial.open(partial_path, std::ios::trunc);
        if (!partial) throw IoError("cannot write '" + partial_path + "'");
        partial << "# sweep partial fingerprint=" << fp << "\n";
    }

    SweepResult result;
    if (options.log) *options.log << "# sweep over " << spec.sweep_variable << ", "
                                  << spec.grid.size() << " grid points x "
                                  << spec.policies.size() << " policies\n";
    for (size_t gi = 0; gi < spec.grid.size(); ++gi) {
        for (const std::string& policy : spec.policies) {
            const std::string key = std::to_string(gi) + "," + policy;
            std::string row;
            const auto it = done.find(key);
            if (it != done.end()) {
                row = it->second;
                ++result.resumed_rows;
            } else {
                row = detail::compute_sweep_row(spec, spec.grid[gi], policy, space, model,
                                                dist);
            }
            if (partial.is_open()) {
                partial << key << "|" << row << "\n";
                partial.flush();
            }
            if (options.log) *options.log << row << "\n";
            result.lines.push_back(std::move(row));
        }
    }

    result.csv = std::string(sweep_csv_header()) + "\n";
    for (const std::string& line : result.lines) result.csv += line + "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw IoError("cannot write '" + out_path + "'");
        out << result.csv;
        if (!out) throw IoError("failed writing '" + out_path + "'");
        out.close();
        partial.close();
        std::remove(partial_path.c_str());
    }
    return result;
}

/// Write the solved policy pair as CSV: one row per (policy half, state) with
/// the chosen action, its power, and the stationary weight; the mixing
/// coefficient and bracketing multipliers ride in header comments.
inline void export_policy_heatmap(const LagrangianSolution& sol, const StateSpace& space,
                                  std::ostream& out) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# xi = %.17g\n", sol.xi);
    out << buf;
    std::snprintf(buf, sizeof buf, "# eta_minus = %.17g\n# eta_plus = %.17g\n", sol.eta_minus,
                  sol.eta_plus);
    out << buf;
    out << "policy,age,round,kind,level,power_watts,pi\n";
    auto dump = [&](const char* name, const PolicyTable& table, const std::vector<double>& pi) {
        for (int i = 0; i < space.size(); ++i) {
            const State& s = space.state(i);
            const ResolvedAction& a = table.at(i);
            std::snprintf(buf, sizeof buf, "%s,%d,%d,%s,%d,%.12g,%.12g\n", name, s.age,
                          s.round, to_string(a.kind), a.level, a.transmit_power,
                          pi[static_cast<size_t>(i)]);
            out << buf;
        }
    };
    dump("minus", sol.table_minus, sol.pi_minus);
    dump("plus", sol.table_plus, sol.pi_plus);
}

inline void export_policy_heatmap(const LagrangianSolution& sol, const StateSpace& space,
                                  const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    export_policy_heatmap(sol, space, out);
    if (!out) throw IoError("failed writing '" + path + "'");
}

struct HeatmapData {
    Policy minus, plus;
    double xi = 1.0;
    double eta_minus = 0.0, eta_plus = 0.0;
};

/// Re-read an exported heatmap; the reconstructed policies are identical to
/// the exported ones (serialization round-trip contract).
inline HeatmapData import_policy_heatmap(std::istream& in, const StateSpace& space) {
    HeatmapData data;
    data.minus.actions.assign(static_cast<size_t>(space.size()), Action{});
    data.plus.actions.assign(static_cast<size_t>(space.size()), Action{});
    std::vector<char> seen_minus(static_cast<size_t>(space.size()), 0);
    std::vector<char> seen_plus(static_cast<size_t>(space.size()), 0);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto grab = [&](const char* tag, double& slot) {
                const std::string t = "# " + std::string(tag) + " = ";
                if (line.rfind(t, 0) == 0) slot = std::strtod(line.c_str() + t.size(), nullptr);
            };
            grab("xi", data.xi);
            grab("eta_minus", data.eta_minus);
            grab("eta_plus", data.eta_plus);
            continue;
        }
        if (!header_seen) {  // the column header row
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 5) throw IoError("malformed heatmap row: '" + line + "'");
        const int age = static_cast<int>(detail::parse_integer(cells[1], "age"));
        const int round = static_cast<int>(detail::parse_integer(cells[2], "round"));
        const Action a{action_kind_from_string(cells[3]),
                       static_cast<int>(detail::parse_integer(cells[4], "level"))};
        const int idx = space.index(age, round);
        if (cells[0] == "minus") {
            data.minus.actions[static_cast<size_t>(idx)] = a;
            seen_minus[static_cast<size_t>(idx)] = 1;
        } else if (cells[0] == "plus") {
            data.plus.actions[static_cast<size_t>(idx)] = a;
            seen_plus[static_cast<size_t>(idx)] = 1;
        } else {
            throw IoError("heatmap policy column must be 'minus' or 'plus', got '" + cells[0] +
                          "'");
        }
    }
    for (int i = 0; i < space.size(); ++i)
        if (!seen_minus[static_cast<size_t>(i)] || !seen_plus[static_cast<size_t>(i)])
            throw IoError("heatmap is missing rows for some states");
    return data;
}

inline HeatmapData import_policy_heatmap(const std::string& path, const StateSpace& space) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return import_policy_heatmap(in, space);
}

} // namespace aoisched
