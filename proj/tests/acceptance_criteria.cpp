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

// Release gate for the library: eight end-to-end checks, one PASS/FAIL line
// each, exit code equal to the number of failures.  Each check pins its own
// tolerances; timing limits are part of the checks that carry them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "aoisched/aoisched.hpp"

using namespace aoisched;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
    std::printf("criterion %d (%s): %s%s%s\n", idx, name, pass ? "PASS" : "FAIL",
                detail.empty() ? "" : " | ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// The reference operating point: 128 levels, M = 4, age cap 100, rate 1,
/// budget -3 dBw, sensing ratio 0.5, weight 1, discount 0.999.
SystemConfig reference_config() { return SystemConfig{}; }

struct Solved {
    LagrangianSolution sol;
    Metrics analytic;
};

Solved solve_instance(const SystemConfig& cfg, int levels) {
    const StateSpace space = build_state_space(cfg);
    const ChannelModel model = quantize_channel(rayleigh_unit_mean(), levels, cfg.rate);
    Solved s{solve_cmdp(space, model, cfg), {}};
    s.analytic = s.sol.mixed;
    return s;
}

Metrics baseline_metrics(const std::string& name, const SystemConfig& cfg, int levels) {
    const StateSpace space = build_state_space(cfg);
    const ChannelModel model = quantize_channel(rayleigh_unit_mean(), levels, cfg.rate);
    const PolicyTable table =
        make_baseline(name, space, model, rayleigh_unit_mean(), cfg, false);
    const std::vector<double> pi = steady_state(induced_chain(table, space, cfg));
    return average_metrics(pi, table, space, cfg);
}

// --- 1: the bisection solver matches exhaustive policy enumeration ----------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = true;
    try {
        struct Fixture {
            int levels, rounds, cap;
        };
        const std::vector<Fixture> fixtures = {{2, 2, 6}, {4, 2, 5}};
        const std::vector<double> budgets = {0.2, 0.5, 1.0, 2.0};
        char buf[160];
        for (const Fixture& f : fixtures) {
            SystemConfig cfg;
            cfg.max_rounds = f.rounds;
            cfg.age_cap = f.cap;
            cfg.power_weight = 1.0;
            cfg.discount = 0.999;
            const StateSpace space = build_state_space(cfg);
            const ChannelModel model =
                quantize_channel(rayleigh_unit_mean(), f.levels, cfg.rate);
            OracleOptions oo;
            oo.policy_cap = 300'000'000;
            const std::vector<OracleSolution> oracle =
                oracle_solve_many(space, model, cfg, budgets, oo);
            const double tol = std::max(1e-4, 5.0 * (1.0 - cfg.discount));
            for (size_t i = 0; i < budgets.size(); ++i) {
                SystemConfig run = cfg;
                run.power_budget = budgets[i];
                const LagrangianSolution sol =
                    solve_cmdp(space, model, run);
                const double diff = std::fabs(sol.objective(run) - oracle[i].objective);
                if (diff > tol) {
                    pass = false;
                    std::snprintf(buf, sizeof buf,
                                  "levels=%d budget=%.1fW solver=%.8f oracle=%.8f diff=%.2e "
                                  "tol=%.0e; ",
                                  f.levels, budgets[i], sol.objective(run),
                                  oracle[i].objective, diff, tol);
                    detail += buf;
                }
            }
        }
        const double dt = seconds_since(t0);
        char tbuf[64];
        std::snprintf(tbuf, sizeof tbuf, "8 budgets checked in %.1fs (limit 120s)", dt);
        if (detail.empty()) detail = tbuf;
        else detail += tbuf;
        if (dt >= 120.0) pass = false;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(1, "solver matches exhaustive oracle", pass, detail);
}

// --- 2: simulation reproduces the analytic long-run averages ----------------

void criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = true;
    try {
        const SystemConfig cfg = reference_config();
        const StateSpace space = build_state_space(cfg);
        const ChannelModel model = quantize_channel(rayleigh_unit_mean(), 128, cfg.rate);
        const FadingDistribution dist = rayleigh_unit_mean();
        const LagrangianSolution sol = solve_cmdp(space, model, cfg);

        const bool mixed = sol.constraint_active && sol.xi < 1.0;
        double redraw = 1.0;
        if (mixed)
            redraw = mixture_redraw_probability(
                sol.xi, delivery_rate(sol.pi_minus, sol.table_minus),
                delivery_rate(sol.pi_plus, sol.table_plus));

        double age = 0.0, transmit = 0.0, psi = 0.0;
        const int replicas = 5;
        for (int r = 0; r < replicas; ++r) {
            SimOptions so;
            so.horizon = 1'000'000;
            so.seed = 1 + static_cast<std::uint64_t>(r);
            const SimulationStats st =
                mixed ? simulate_mixed(sol.table_minus, sol.table_plus, redraw, space, dist,
                                       cfg, so)
                      : simulate(sol.table_minus, space, dist, cfg, so);
            age += st.time_avg_age;
            transmit += st.avg_transmit_power;
            psi += st.energy_efficiency;
        }
        age /= replicas;
        transmit /= replicas;
        psi /= replicas;

        const double e_age = std::fabs(age - sol.mixed.avg_age) / sol.mixed.avg_age;
        const double e_tx =
            std::fabs(transmit - sol.mixed.avg_transmit_power) / sol.mixed.avg_transmit_power;
        const double e_psi =
            std::fabs(psi - sol.mixed.energy_efficiency) / sol.mixed.energy_efficiency;
        const double dt = seconds_since(t0);
        pass = e_age <= 0.01 && e_tx <= 0.01 && e_psi <= 0.01 && dt < 300.0;
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "rel.err age=%.4f%% transmit=%.4f%% efficiency=%.4f%% (cap 1%%), "
                      "%.1fs (limit 300s)",
                      100 * e_age, 100 * e_tx, 100 * e_psi, dt);
        detail = buf;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(2, "simulation agrees with analysis within 1%", pass, detail);
}

// --- 3: the solved policy never ages worse than either baseline -------------

void criterion_3() {
    std::string detail;
    bool pass = true;
    try {
        bool strict = false;
        char buf[160];
        for (int dbw = -5; dbw <= 3; ++dbw) {
            SystemConfig cfg = reference_config();
            cfg.power_budget = dbw_to_watt(dbw);
            const double opt_age = solve_instance(cfg, 128).analytic.avg_age;
            for (const char* name : {"generation", "retransmission"}) {
                const double base_age = baseline_metrics(name, cfg, 128).avg_age;
                if (opt_age > base_age + 1e-9) {
                    pass = false;
                    std::snprintf(buf, sizeof buf, "%+d dBw: optimal %.4f > %s %.4f; ", dbw,
                                  opt_age, name, base_age);
                    detail += buf;
                }
                if (base_age - opt_age > 1e-6) strict = true;
            }
        }
        if (!strict) {
            pass = false;
            detail += "no strict improvement anywhere; ";
        }
        if (detail.empty()) detail = "dominates both baselines on all 9 budgets";
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(3, "optimal age never exceeds a baseline's", pass, detail);
}

// --- 4: structure of the solved policy table ---------------------------------

void criterion_4() {
    std::string detail;
    bool pass = true;
    try {
        const SystemConfig cfg = reference_config();
        const StateSpace space = build_state_space(cfg);
        const Solved s = solve_instance(cfg, 128);
        const PolicyTable& table = s.sol.table_minus;

        char buf[96];
        if (table.at(space.index(1, 1)).transmit_power != 0.0) {
            pass = false;
            detail += "state (1,1) is not silent; ";
        }
        int offenders = 0;
        for (int m = 1; m <= cfg.max_rounds; ++m) {
            double prev = -1.0;
            bool active = false;
            for (int age = m; age <= cfg.age_cap; ++age) {
                const double p = table.at(space.index(age, m)).transmit_power;
                if (!active) {
                    if (p > 0.0) {
                        active = true;
                        prev = p;
                    }
                    continue;
                }
                if (p < prev - 1e-12) {
                    pass = false;
                    if (++offenders <= 4) {
                        std::snprintf(buf, sizeof buf, "power drops at (age=%d, round=%d); ",
                                      age, m);
                        detail += buf;
                    }
                }
                prev = p;
            }
        }
        if (offenders > 4) {
            std::snprintf(buf, sizeof buf, "(%d offending states total); ", offenders);
            detail += buf;
        }
        if (detail.empty())
            detail = "(1,1) silent; per-round power nondecreasing in age past first active age";
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(4, "solved policy is a monotone threshold table", pass, detail);
}

// --- 5: a larger power weight trades age for efficiency ----------------------

void criterion_5() {
    std::string detail;
    bool pass = true;
    try {
        char buf[160];
        for (int dbw = 0; dbw >= -5; --dbw) {
            SystemConfig cfg = reference_config();
            cfg.power_budget = dbw_to_watt(dbw);
            cfg.power_weight = 2.0;
            const Metrics m2 = solve_instance(cfg, 128).analytic;
            cfg.power_weight = 3.0;
            const Metrics m3 = solve_instance(cfg, 128).analytic;
            if (m2.avg_age > m3.avg_age + 1e-9) {
                pass = false;
                std::snprintf(buf, sizeof buf, "%+d dBw: age(w=2)=%.4f > age(w=3)=%.4f; ",
                              dbw, m2.avg_age, m3.avg_age);
                detail += buf;
            }
            if (m3.energy_efficiency < m2.energy_efficiency - 1e-9) {
                pass = false;
                std::snprintf(buf, sizeof buf,
                              "%+d dBw: efficiency(w=3)=%.4f < efficiency(w=2)=%.4f; ", dbw,
                              m3.energy_efficiency, m2.energy_efficiency);
                detail += buf;
            }
        }
        if (detail.empty()) detail = "age and efficiency both ordered on all 6 budgets";
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(5, "raising the power weight raises efficiency, not freshness", pass, detail);
}

// --- 6: patient planning can only help ---------------------------------------

void criterion_6() {
    std::string detail;
    bool pass = true;
    try {
        const std::vector<double> discounts = {0.9, 0.99, 0.999};
        std::vector<double> ages;
        for (double g : discounts) {
            SystemConfig cfg = reference_config();
            cfg.discount = g;
            ages.push_back(solve_instance(cfg, 128).analytic.avg_age);
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "age %.6f (0.9) -> %.6f (0.99) -> %.6f (0.999)",
                      ages[0], ages[1], ages[2]);
        detail = buf;
        for (size_t i = 1; i < ages.size(); ++i)
            if (ages[i] > ages[i - 1] + 1e-9) pass = false;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(6, "average age is nonincreasing in the discount", pass, detail);
}

// --- 7: sensing cost bends the efficiency-freshness trace --------------------

void criterion_7() {
    std::string detail;
    bool pass = true;
    try {
        const std::vector<double> ratios = {0.25, 0.5, 1.0};
        std::vector<double> dbws;
        for (double d = -1.0; d >= -4.0 - 1e-9; d -= 0.5) dbws.push_back(d);

        bool any_non_monotone = false;
        std::printf("alpha,c_max_dbw,avg_age,efficiency\n");
        char buf[160];
        for (double alpha : ratios) {
            std::vector<double> ages, psis;
            for (double dbw : dbws) {
                SystemConfig cfg = reference_config();
                cfg.sensing_ratio = alpha;
                cfg.power_budget = dbw_to_watt(dbw);
                const Metrics m = solve_instance(cfg, 128).analytic;
                ages.push_back(m.avg_age);
                psis.push_back(m.energy_efficiency);
                std::printf("%.2f,%.1f,%.10g,%.10g\n", alpha, dbw, m.avg_age,
                            m.energy_efficiency);
            }
            std::fflush(stdout);
            for (size_t i = 1; i < ages.size(); ++i) {
                if (ages[i] < ages[i - 1] - 1e-9) {
                    pass = false;
                    std::snprintf(buf, sizeof buf,
                                  "alpha=%.2f: age falls from %.4f to %.4f as the budget "
                                  "shrinks to %.1f dBw; ",
                                  alpha, ages[i - 1], ages[i], dbws[i]);
                    detail += buf;
                }
            }
            bool up = true, down = true;
            for (size_t i = 1; i < psis.size(); ++i) {
                if (psis[i] > psis[i - 1] + 1e-9) down = false;
                if (psis[i] < psis[i - 1] - 1e-9) up = false;
            }
            if (!up && !down) any_non_monotone = true;
        }
        if (!any_non_monotone) {
            pass = false;
            detail += "efficiency is monotone along every sensing-ratio trace; ";
        }
        if (detail.empty())
            detail = "age monotone in budget for all ratios; efficiency bends for >= 1 ratio";
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(7, "efficiency-freshness traces bend with sensing cost", pass, detail);
}

// --- 8: the unit and property suites are green --------------------------------

void criterion_8() {
    std::string detail;
    bool pass = true;
    const std::string cmd = std::string("ctest --test-dir \"") + AOISCHED_BUILD_DIR +
                            "\" -E '^acceptance_criteria$' --output-on-failure"
                            " > acceptance_unit_suites.log 2>&1";
    const int raw = std::system(cmd.c_str());
    const int code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    pass = code == 0;
    char buf[96];
    std::snprintf(buf, sizeof buf, "ctest exit code %d%s", code,
                  pass ? "" : " (see acceptance_unit_suites.log)");
    detail = buf;
    report(8, "unit and property suites pass", pass, detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (g_failures == 0) std::printf("all 8 acceptance criteria passed\n");
    else std::printf("%d acceptance criteria FAILED\n", g_failures);
    return g_failures;
}
