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

// End-to-end checks of the command-line binary: subcommands, global flags,
// and the documented exit codes (0 ok, 1 bad config/usage, 2 solver failure,
// 3 I/O failure).

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

const fs::path kDir = fs::temp_directory_path() / "aoisched_cli_tests";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    fs::create_directories(kDir);
    const fs::path out_file = kDir / "stdout.txt";
    const fs::path err_file = kDir / "stderr.txt";
    const std::string cmd = std::string("\"") + AOISCHED_BIN + "\" " + args + " > \"" +
                            out_file.string() + "\" 2> \"" + err_file.string() + "\"";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

/// Three-state configuration that every subcommand can chew through fast.
fs::path tiny_config() {
    fs::create_directories(kDir);
    const fs::path p = kDir / "tiny.ini";
    std::ofstream f(p);
    f << "[channel]\nlevels = 2\n"
      << "[system]\nmax_rounds = 1\nage_cap = 3\n"
      << "[solver]\ngamma = 0.9\n"
      << "[sim]\nhorizon = 2000\nreplicas = 2\n";
    return p;
}

fs::path sweep_config() {
    fs::create_directories(kDir);
    const fs::path p = kDir / "sweep.ini";
    std::ofstream f(p);
    f << "[channel]\nlevels = 2\n"
      << "[system]\nmax_rounds = 1\nage_cap = 3\n"
      << "[solver]\ngamma = 0.9\n"
      << "[sim]\nhorizon = 1000\nreplicas = 2\n"
      << "[sweep]\nvariable = omega\ngrid = 1, 2\npolicies = optimal, generation\n";
    return p;
}

}  // namespace

TEST_CASE("help is available and the subcommand is mandatory") {
    CHECK(run("--help").exit_code == 0);
    CHECK_THAT(run("--help").out, ContainsSubstring("solve"));
    CHECK(run("").exit_code == 1);
    CHECK(run("--bogus-flag").exit_code == 1);
    CHECK(run("frobnicate").exit_code == 1);
}

TEST_CASE("solve prints a summary and honors --out and --quiet") {
    const fs::path cfg = tiny_config();
    const fs::path out = kDir / "summary.txt";
    fs::remove(out);

    const RunResult r = run("solve --config \"" + cfg.string() + "\" --out \"" +
                            out.string() + "\"");
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("objective"));
    CHECK_THAT(r.out, ContainsSubstring("eta_minus"));
    CHECK_THAT(r.out, ContainsSubstring("xi"));
    CHECK_THAT(r.out, ContainsSubstring("constraint_active"));
    CHECK_THAT(r.err, ContainsSubstring("[channel]"));  // config echo on stderr
    CHECK(slurp(out) == r.out);

    const RunResult q = run("solve --config \"" + cfg.string() + "\" --quiet");
    CHECK(q.exit_code == 0);
    CHECK(q.err.empty());
}

TEST_CASE("solve can record the multiplier search trace") {
    const fs::path cfg = tiny_config();
    const fs::path trace = kDir / "eta_trace.csv";
    fs::remove(trace);
    const RunResult r =
        run("solve --config \"" + cfg.string() + "\" --eta-trace \"" + trace.string() + "\"");
    CHECK(r.exit_code == 0);
    CHECK_THAT(slurp(trace),
               ContainsSubstring("phase,eta,vi_iterations,residual,avg_transmit_power"));
}

TEST_CASE("config problems map to the documented exit codes") {
    CHECK(run("solve --config \"" + (kDir / "missing.ini").string() + "\"").exit_code == 3);

    const fs::path bad = kDir / "bad.ini";
    fs::create_directories(kDir);
    {
        std::ofstream f(bad);
        f << "[system]\nmax_rounds = 0\n";
    }
    CHECK(run("solve --config \"" + bad.string() + "\"").exit_code == 1);
}

TEST_CASE("simulate reports per-replica rows for solved and named policies") {
    const fs::path cfg = tiny_config();

    const RunResult opt = run("simulate --config \"" + cfg.string() + "\" --quiet");
    CHECK(opt.exit_code == 0);
    CHECK_THAT(opt.out,
               ContainsSubstring("replica,seed,time_avg_age,avg_transmit_power,avg_total_power,"
                                 "energy_efficiency,delivery_rate,packets_generated,"
                                 "packets_delivered,truncation_wraps,max_age,fraction_minus"));

    const RunResult gen = run("simulate --config \"" + cfg.string() +
                              "\" --policy generation --replicas 3 --quiet");
    CHECK(gen.exit_code == 0);
    int data_rows = 0;
    std::stringstream ss(gen.out);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty() && line[0] != '#' && line.rfind("replica,", 0) != 0) ++data_rows;
    CHECK(data_rows == 3);
    CHECK_THAT(gen.out, ContainsSubstring("# age_mean"));

    CHECK(run("simulate --config \"" + cfg.string() + "\" --policy bogus --quiet").exit_code ==
          1);
}

TEST_CASE("simulate can dump the first replica's trace") {
    const fs::path cfg = tiny_config();
    const fs::path trace = kDir / "trace.csv";
    fs::remove(trace);
    const RunResult r = run("simulate --config \"" + cfg.string() +
                            "\" --policy retransmission --trace-out \"" + trace.string() +
                            "\" --quiet");
    CHECK(r.exit_code == 0);
    CHECK_THAT(slurp(trace), ContainsSubstring("t,age,round,kind,level,gain,success"));
}

TEST_CASE("sweep needs an output path and then writes the table there") {
    const fs::path cfg = sweep_config();
    CHECK(run("sweep --config \"" + cfg.string() + "\" --quiet").exit_code == 1);

    const fs::path out = kDir / "sweep_out.csv";
    fs::remove(out);
    const RunResult r =
        run("sweep --config \"" + cfg.string() + "\" --out \"" + out.string() + "\" --quiet");
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("sweep_value,policy,", 0) == 0);
    // Header plus 2 grid points x 2 policies.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("policy-dump emits the action table") {
    const fs::path cfg = tiny_config();
    const RunResult r = run("policy-dump --config \"" + cfg.string() + "\" --quiet");
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("policy,age,round,kind,level"));
    CHECK_THAT(r.out, ContainsSubstring("minus,1,1,"));
    CHECK_THAT(r.out, ContainsSubstring("plus,3,1,"));
}

TEST_CASE("oracle-check compares the solver against exhaustive enumeration") {
    const fs::path cfg = tiny_config();
    const RunResult r = run("oracle-check --config \"" + cfg.string() + "\" --quiet");
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("verdict = pass"));
    CHECK_THAT(r.out, Catch::Matchers::Predicate<std::string>(
                          [](const std::string& s) { return s.find("FAIL") == std::string::npos; },
                          "contains no FAIL verdict"));

    const RunResult caps =
        run("oracle-check --config \"" + cfg.string() + "\" --policy-cap 1 --quiet");
    CHECK(caps.exit_code == 2);
}
