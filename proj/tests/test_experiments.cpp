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

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aoisched/experiments.hpp"

using namespace aoisched;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

/// Tiny three-state experiment that solves in microseconds.
ExperimentSpec tiny_spec() {
    ExperimentSpec spec;
    spec.levels = 2;
    spec.system.max_rounds = 1;
    spec.system.age_cap = 3;
    spec.system.discount = 0.9;
    spec.horizon = 2000;
    spec.replicas = 2;
    spec.seed = 3;
    spec.sweep_variable = "omega";
    spec.grid = {1.0, 2.0};
    return spec;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sweep values map onto the right configuration field") {
    SystemConfig base;
    CHECK_THAT(apply_sweep_value(base, "c_max_dbw", -3.0).power_budget,
               WithinAbs(0.5011872336272722, 1e-15));
    CHECK(apply_sweep_value(base, "omega", 2.5).power_weight == 2.5);
    CHECK(apply_sweep_value(base, "gamma", 0.95).discount == 0.95);
    CHECK(apply_sweep_value(base, "alpha", 0.25).sensing_ratio == 0.25);
    CHECK(apply_sweep_value(base, "omega", 2.5).power_budget == base.power_budget);
    CHECK_THROWS_AS(apply_sweep_value(base, "budget", 1.0), ConfigError);
}

TEST_CASE("baselines are built by name") {
    SystemConfig cfg;
    cfg.max_rounds = 2;
    cfg.age_cap = 6;
    const StateSpace sp = build_state_space(cfg);
    const FadingDistribution d = rayleigh_unit_mean();
    const ChannelModel m = quantize_channel(d, 4, cfg.rate);

    const PolicyTable g = make_baseline("generation", sp, m, d, cfg, false);
    const PolicyTable g_ref = baseline_generation(cfg.power_budget, d, sp, cfg);
    REQUIRE(g.size() == g_ref.size());
    for (int i = 0; i < g.size(); ++i) {
        CHECK(g.at(i).kind == g_ref.at(i).kind);
        CHECK(g.at(i).transmit_power == g_ref.at(i).transmit_power);
    }

    const PolicyTable rq = make_baseline("retransmission", sp, m, d, cfg, true);
    const PolicyTable rq_ref = baseline_retransmission_quantized(cfg.power_budget, m, sp, cfg);
    REQUIRE(rq.size() == rq_ref.size());
    for (int i = 0; i < rq.size(); ++i) {
        CHECK(rq.at(i).kind == rq_ref.at(i).kind);
        CHECK(rq.at(i).level == rq_ref.at(i).level);
    }

    CHECK_THROWS_AS(make_baseline("optimal", sp, m, d, cfg, false), ConfigError);
    CHECK_THROWS_AS(make_baseline("greedy", sp, m, d, cfg, false), ConfigError);
}

TEST_CASE("csv formatting helpers are stable") {
    CHECK(std::string(sweep_csv_header()) ==
          "sweep_value,policy,analytic_age,analytic_transmit_power,analytic_total_power,"
          "analytic_efficiency,sim_age_mean,sim_age_stderr,sim_efficiency_mean,"
          "sim_efficiency_stderr,eta,xi,status");
    CHECK(detail::csv_num(0.5) == "0.5");
    CHECK(detail::csv_num(-3.0) == "-3");
    CHECK(detail::csv_num(2.0 / 3.0) == "0.6666666667");

    const detail::MeanStderr ms = detail::mean_stderr({1.0, 2.0, 3.0});
    CHECK_THAT(ms.mean, WithinAbs(2.0, 1e-15));
    CHECK_THAT(ms.stderr_, WithinAbs(0.5773502691896257, 1e-15));
    const detail::MeanStderr single = detail::mean_stderr({5.0});
    CHECK(single.mean == 5.0);
    CHECK(single.stderr_ == 0.0);

    // 64-bit FNV-1a reference vectors.
    CHECK(detail::fnv1a("") == 14695981039346656037ULL);
    CHECK(detail::fnv1a("a") == 12638187200555641996ULL);
}

TEST_CASE("sweeps are deterministic and well-formed") {
    const ExperimentSpec spec = tiny_spec();
    const SweepResult a = run_sweep(spec, "");
    const SweepResult b = run_sweep(spec, "");
    CHECK(a.csv == b.csv);  // byte-for-byte reproducible
    CHECK(a.resumed_rows == 0);

    REQUIRE(a.lines.size() == spec.grid.size() * spec.policies.size());
    CHECK(a.csv.rfind(std::string(sweep_csv_header()) + "\n", 0) == 0);
    size_t li = 0;
    for (size_t gi = 0; gi < spec.grid.size(); ++gi) {
        for (const std::string& policy : spec.policies) {
            const std::string prefix = detail::csv_num(spec.grid[gi]) + "," + policy + ",";
            INFO("row " << li << ": " << a.lines[li]);
            CHECK(a.lines[li].rfind(prefix, 0) == 0);
            CHECK_THAT(a.lines[li], ContainsSubstring(",ok"));
            ++li;
        }
    }
}

TEST_CASE("sweep output lands on disk and the scratch file is cleaned up") {
    namespace fs = std::filesystem;
    const ExperimentSpec spec = tiny_spec();
    const fs::path out = fs::temp_directory_path() / "aoisched_sweep_test.csv";
    const fs::path partial = out.string() + ".partial";
    fs::remove(out);
    fs::remove(partial);

    const SweepResult r = run_sweep(spec, out.string());
    CHECK(read_file(out) == r.csv);
    CHECK_FALSE(fs::exists(partial));
    fs::remove(out);
}

TEST_CASE("interrupted sweeps resume from the scratch file") {
    namespace fs = std::filesystem;
    const ExperimentSpec spec = tiny_spec();
    const fs::path out = fs::temp_directory_path() / "aoisched_sweep_resume.csv";
    const fs::path partial = out.string() + ".partial";

    char fp[32];
    std::snprintf(fp, sizeof fp, "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a(spec.echo())));

    // A scratch file with a matching fingerprint short-circuits its rows.
    {
        std::ofstream p(partial);
        p << "# sweep partial fingerprint=" << fp << "\n";
        p << "0,optimal|SENTINEL\n";
    }
    const SweepResult resumed = run_sweep(spec, out.string());
    CHECK(resumed.resumed_rows == 1);
    REQUIRE_FALSE(resumed.lines.empty());
    CHECK(resumed.lines[0] == "SENTINEL");
    CHECK_THAT(read_file(out), ContainsSubstring("SENTINEL"));
    CHECK_FALSE(fs::exists(partial));

    // A stale fingerprint (different spec) is ignored.
    {
        std::ofstream p(partial);
        p << "# sweep partial fingerprint=0000000000000000\n";
        p << "0,optimal|SENTINEL\n";
    }
    const SweepResult stale = run_sweep(spec, out.string());
    CHECK(stale.resumed_rows == 0);
    CHECK(read_file(out).find("SENTINEL") == std::string::npos);

    // Resume can be disabled outright.
    {
        std::ofstream p(partial);
        p << "# sweep partial fingerprint=" << fp << "\n";
        p << "0,optimal|SENTINEL\n";
    }
    SweepOptions opts;
    opts.resume = false;
    const SweepResult fresh = run_sweep(spec, out.string(), opts);
    CHECK(fresh.resumed_rows == 0);
    CHECK(fresh.lines[0] != "SENTINEL");
    fs::remove(out);
    fs::remove(partial);
}

TEST_CASE("sweeps validate their configuration up front") {
    ExperimentSpec no_sweep = tiny_spec();
    no_sweep.sweep_variable.clear();
    no_sweep.grid.clear();
    CHECK_THROWS_AS(run_sweep(no_sweep, ""), ConfigError);

    ExperimentSpec bad_grid = tiny_spec();
    bad_grid.sweep_variable = "gamma";
    bad_grid.grid = {0.5, 1.5};  // 1.5 is not a valid discount
    CHECK_THROWS_AS(run_sweep(bad_grid, ""), ConfigError);
}

TEST_CASE("policy heatmaps round-trip through their CSV form") {
    ExperimentSpec spec = tiny_spec();
    spec.system.power_weight = 1.0;
    const StateSpace sp = build_state_space(spec.system);
    const ChannelModel m = spec.build_channel();
    const LagrangianSolution sol = solve_cmdp(sp, m, spec.system);

    std::stringstream buf;
    export_policy_heatmap(sol, sp, buf);
    const std::string text = buf.str();
    CHECK_THAT(text, ContainsSubstring("policy,age,round,kind,level,power_watts,pi"));

    std::stringstream in(text);
    const HeatmapData data = import_policy_heatmap(in, sp);
    CHECK(data.minus == sol.policy_minus);
    CHECK(data.plus == sol.policy_plus);
    CHECK(data.xi == sol.xi);
    CHECK(data.eta_minus == sol.eta_minus);
    CHECK(data.eta_plus == sol.eta_plus);
}

TEST_CASE("heatmap import rejects incomplete or malformed tables") {
    const StateSpace sp = build_state_space(1, 3);
    const std::string header = "policy,age,round,kind,level,power_watts,pi\n";

    std::stringstream missing(header + "minus,1,1,retransmit,1,1.0,0.5\n");
    CHECK_THROWS_AS(import_policy_heatmap(missing, sp), IoError);

    std::stringstream short_row(header + "minus,1,1\n");
    CHECK_THROWS_AS(import_policy_heatmap(short_row, sp), IoError);

    std::string full;
    for (int age = 1; age <= 3; ++age) full += "zebra," + std::to_string(age) +
                                               ",1,retransmit,1,1.0,0.3\n";
    std::stringstream bad_half(header + full);
    CHECK_THROWS_AS(import_policy_heatmap(bad_half, sp), IoError);
}
