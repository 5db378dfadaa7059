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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aoisched/aoisched.hpp"

namespace {

using namespace aoisched;

std::string fmt(double v, int precision = 12) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

/// Print `text` to stdout and, when `out_path` is nonempty, also to that file.
void emit(const std::string& text, const std::string& out_path) {
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw IoError("cannot open output file: " + out_path);
        f << text;
        if (!f.good()) throw IoError("failed writing output file: " + out_path);
    }
}

struct Common {
    std::string config_path;
    std::string out_path;
    unsigned long long seed = 0;
    bool seed_set = false;
    int replicas = 0;
    bool replicas_set = false;
    bool quiet = false;
};

ExperimentSpec load_spec(const Common& c) {
    ExperimentSpec spec;
    if (!c.config_path.empty()) spec = load_config(c.config_path);
    if (c.seed_set) spec.seed = c.seed;
    if (c.replicas_set) spec.replicas = c.replicas;
    spec.validate();
    return spec;
}

void maybe_echo(const ExperimentSpec& spec, bool quiet) {
    if (!quiet) std::cerr << spec.echo();
}

std::string solve_summary(const LagrangianSolution& sol, const SystemConfig& cfg) {
    long long sweeps = 0;
    for (const auto& pt : sol.trace) sweeps += pt.vi_iterations;
    std::ostringstream os;
    os << "eta_minus = " << fmt(sol.eta_minus) << "\n"
       << "eta_plus = " << fmt(sol.eta_plus) << "\n"
       << "xi = " << fmt(sol.xi) << "\n"
       << "constraint_active = " << (sol.constraint_active ? "true" : "false") << "\n"
       << "objective = " << fmt(sol.objective(cfg)) << "\n"
       << "avg_age = " << fmt(sol.mixed.avg_age) << "\n"
       << "avg_transmit_power = " << fmt(sol.mixed.avg_transmit_power) << "\n"
       << "avg_total_power = " << fmt(sol.mixed.avg_total_power) << "\n"
       << "energy_efficiency = " << fmt(sol.mixed.energy_efficiency) << "\n"
       << "generation_rate = " << fmt(sol.mixed.generation_rate) << "\n"
       << "avg_age_minus = " << fmt(sol.metrics_minus.avg_age) << "\n"
       << "avg_transmit_power_minus = " << fmt(sol.metrics_minus.avg_transmit_power) << "\n"
       << "avg_age_plus = " << fmt(sol.metrics_plus.avg_age) << "\n"
       << "avg_transmit_power_plus = " << fmt(sol.metrics_plus.avg_transmit_power) << "\n"
       << "eta_evaluations = " << sol.trace.size() << "\n"
       << "vi_sweeps_total = " << sweeps << "\n";
    return os.str();
}

int run_solve(const Common& c, const std::string& eta_trace_path) {
    const ExperimentSpec spec = load_spec(c);
    maybe_echo(spec, c.quiet);
    const StateSpace space = build_state_space(spec.system);
    const ChannelModel model = spec.build_channel();

    std::ofstream trace_file;
    std::ostream* trace = nullptr;
    if (!eta_trace_path.empty()) {
        trace_file.open(eta_trace_path);
        if (!trace_file) throw IoError("cannot open trace file: " + eta_trace_path);
        trace = &trace_file;
    }
    const LagrangianSolution sol = solve_cmdp(space, model, spec.system, trace);
    if (trace && !trace_file.good()) throw IoError("failed writing trace file: " + eta_trace_path);
    emit(solve_summary(sol, spec.system), c.out_path);
    return 0;
}

void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open trace file: " + path);
    f << "t,age,round,kind,level,gain,success\n";
    for (const auto& r : rows)
        f << r.t << ',' << r.age << ',' << r.round << ',' << to_string(r.kind) << ','
          << r.level << ',' << fmt(r.gain) << ',' << (r.success ? 1 : 0) << "\n";
    if (!f.good()) throw IoError("failed writing trace file: " + path);
}

int run_simulate(const Common& c, const std::string& policy_name, long long horizon,
                 bool horizon_set, const std::string& trace_path, bool truncate,
                 bool truncate_set) {
    ExperimentSpec spec = load_spec(c);
    if (horizon_set) spec.horizon = horizon;
    if (truncate_set) spec.truncate_age = truncate;
    spec.validate();
    maybe_echo(spec, c.quiet);
    const StateSpace space = build_state_space(spec.system);
    const ChannelModel model = spec.build_channel();
    const FadingDistribution dist = spec.distribution();
    const SystemConfig& cfg = spec.system;

    PolicyTable minus, plus;
    double redraw = 1.0;
    bool mixed = false;
    if (policy_name == "optimal") {
        if (!c.quiet) std::cerr << "solving for the optimal policy...\n";
        const LagrangianSolution sol = solve_cmdp(space, model, cfg);
        minus = sol.table_minus;
        plus = sol.table_plus;
        if (sol.constraint_active && sol.xi < 1.0) {
            mixed = true;
            try {
                redraw = mixture_redraw_probability(sol.xi,
                                                    delivery_rate(sol.pi_minus, sol.table_minus),
                                                    delivery_rate(sol.pi_plus, sol.table_plus));
            } catch (const std::invalid_argument& e) {
                throw SolverError(std::string("mixture simulation unavailable: ") + e.what());
            }
        }
    } else {
        minus = make_baseline(policy_name, space, model, dist, cfg, spec.quantized_baselines);
        plus = minus;
    }

    std::ostringstream os;
    os << "replica,seed,time_avg_age,avg_transmit_power,avg_total_power,energy_efficiency,"
          "delivery_rate,packets_generated,packets_delivered,truncation_wraps,max_age,"
          "fraction_minus\n";
    std::vector<double> ages, effs;
    for (int r = 0; r < spec.replicas; ++r) {
        SimOptions opts;
        opts.horizon = spec.horizon;
        opts.seed = spec.seed + static_cast<unsigned long long>(r);
        opts.truncate_age = spec.truncate_age;
        std::vector<TraceRow> trace_rows;
        if (r == 0 && !trace_path.empty()) opts.trace = &trace_rows;
        const SimulationStats st =
            mixed ? simulate_mixed(minus, plus, redraw, space, dist, cfg, opts)
                  : simulate(minus, space, dist, cfg, opts);
        if (r == 0 && !trace_path.empty()) write_trace_csv(trace_rows, trace_path);
        ages.push_back(st.time_avg_age);
        effs.push_back(st.energy_efficiency);
        os << r << ',' << opts.seed << ',' << fmt(st.time_avg_age, 10) << ','
           << fmt(st.avg_transmit_power, 10) << ',' << fmt(st.avg_total_power, 10) << ','
           << fmt(st.energy_efficiency, 10) << ',' << fmt(st.delivery_rate, 10) << ','
           << st.packets_generated << ',' << st.packets_delivered << ',' << st.truncation_wraps
           << ',' << st.max_age << ',' << fmt(st.fraction_minus, 10) << "\n";
    }
    const auto age_ms = detail::mean_stderr(ages);
    const auto eff_ms = detail::mean_stderr(effs);
    os << "# age_mean = " << fmt(age_ms.mean, 10) << ", age_stderr = " << fmt(age_ms.stderr_, 10)
       << "\n";
    os << "# efficiency_mean = " << fmt(eff_ms.mean, 10)
       << ", efficiency_stderr = " << fmt(eff_ms.stderr_, 10) << "\n";
    emit(os.str(), c.out_path);
    return 0;
}

int run_sweep(const Common& c, bool no_resume) {
    const ExperimentSpec spec = load_spec(c);
    if (c.out_path.empty()) throw ConfigError("sweep requires --out <csv path>");
    maybe_echo(spec, c.quiet);
    SweepOptions opts;
    opts.resume = !no_resume;
    opts.log = c.quiet ? nullptr : &std::cerr;
    const SweepResult res = run_sweep(spec, c.out_path, opts);
    if (!c.quiet)
        std::cerr << "wrote " << c.out_path << " (" << res.lines.size() << " rows, "
                  << res.resumed_rows << " resumed)\n";
    return 0;
}

int run_policy_dump(const Common& c) {
    const ExperimentSpec spec = load_spec(c);
    maybe_echo(spec, c.quiet);
    const StateSpace space = build_state_space(spec.system);
    const ChannelModel model = spec.build_channel();
    const LagrangianSolution sol = solve_cmdp(space, model, spec.system);
    if (c.out_path.empty()) {
        export_policy_heatmap(sol, space, std::cout);
    } else {
        export_policy_heatmap(sol, space, c.out_path);
    }
    return 0;
}

int run_oracle_check(const Common& c, std::vector<double> budgets, long long cap) {
    const ExperimentSpec spec = load_spec(c);
    maybe_echo(spec, c.quiet);
    const StateSpace space = build_state_space(spec.system);
    const ChannelModel model = spec.build_channel();
    if (budgets.empty()) budgets.push_back(spec.system.power_budget);

    OracleOptions oracle_opts;
    oracle_opts.policy_cap = cap;
    const std::vector<OracleSolution> truth =
        oracle_solve_many(space, model, spec.system, budgets, oracle_opts);

    const double tol = std::max(1e-4, 5.0 * (1.0 - spec.system.discount));
    std::ostringstream os;
    int failures = 0;
    for (size_t i = 0; i < budgets.size(); ++i) {
        SystemConfig cfg = spec.system;
        cfg.power_budget = budgets[i];
        const LagrangianSolution sol = solve_cmdp(space, model, cfg);
        const double solver_obj = sol.objective(cfg);
        const double oracle_obj = truth[i].objective;
        const double diff = std::abs(solver_obj - oracle_obj);
        const bool ok = diff <= tol;
        if (!ok) ++failures;
        os << "budget = " << fmt(budgets[i], 6) << " w, solver = " << fmt(solver_obj, 10)
           << ", oracle = " << fmt(oracle_obj, 10) << ", diff = " << fmt(diff, 3)
           << ", tol = " << fmt(tol, 3) << ", verdict = " << (ok ? "pass" : "FAIL") << "\n";
    }
    os << "oracle-check: " << (budgets.size() - static_cast<size_t>(failures)) << "/"
       << budgets.size() << " within tolerance (" << truth.front().policies_evaluated
       << " policies examined)\n";
    emit(os.str(), c.out_path);
    if (failures > 0) throw SolverError("oracle-check: solver objective outside tolerance");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"aoisched: scheduling of status updates over a fading channel, trading\n"
                 "information freshness against transmit and sensing power"};
    app.require_subcommand(1);

    Common c;
    app.add_option("--config", c.config_path, "experiment config file (INI)");
    app.add_option("--out", c.out_path, "output file path");
    auto* seed_opt = app.add_option("--seed", c.seed, "base RNG seed");
    auto* rep_opt = app.add_option("--replicas", c.replicas, "independent simulation replicas");
    app.add_flag("--quiet", c.quiet, "suppress progress and config echo on stderr");

    auto* solve = app.add_subcommand("solve", "solve the constrained scheduling problem");
    solve->fallthrough();
    std::string eta_trace_path;
    solve->add_option("--eta-trace", eta_trace_path,
                      "write the multiplier search trace to this CSV file");

    auto* simulate = app.add_subcommand("simulate", "roll out a policy on the simulator");
    simulate->fallthrough();
    std::string policy_name = "optimal";
    simulate->add_option("--policy", policy_name,
                         "policy to roll out: optimal, retransmission, or generation");
    long long horizon = 0;
    auto* horizon_opt = simulate->add_option("--horizon", horizon, "slots per replica");
    std::string sim_trace_path;
    simulate->add_option("--trace-out", sim_trace_path,
                         "write the first replica's slot trace to this CSV file");
    bool truncate = false;
    auto* trunc_opt = simulate->add_flag("--truncate-age", truncate,
                                         "truncate the simulated age at the solver's age cap");

    auto* sweep = app.add_subcommand("sweep", "run the configured parameter sweep to a CSV");
    sweep->fallthrough();
    bool no_resume = false;
    sweep->add_flag("--no-resume", no_resume, "ignore any partial results from earlier runs");

    auto* dump = app.add_subcommand("policy-dump", "solve and export the policy tables");
    dump->fallthrough();

    auto* oracle = app.add_subcommand(
        "oracle-check", "compare the solver against exhaustive policy enumeration");
    oracle->fallthrough();
    std::vector<double> budgets;
    oracle->add_option("--budgets", budgets, "power budgets in watts (comma separated)")
        ->delimiter(',');
    long long cap = OracleOptions{}.policy_cap;
    oracle->add_option("--policy-cap", cap, "abort if the search would exceed this many policies");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    c.seed_set = seed_opt->count() > 0;
    c.replicas_set = rep_opt->count() > 0;

    try {
        if (*solve) return run_solve(c, eta_trace_path);
        if (*simulate)
            return run_simulate(c, policy_name, horizon, horizon_opt->count() > 0,
                                sim_trace_path, truncate, trunc_opt->count() > 0);
        if (*sweep) return run_sweep(c, no_resume);
        if (*dump) return run_policy_dump(c);
        if (*oracle) return run_oracle_check(c, budgets, cap);
        std::cerr << "error: no subcommand given\n";
        return 1;
    } catch (const aoisched::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const aoisched::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const aoisched::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
