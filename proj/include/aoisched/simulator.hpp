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
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "aoisched/chain.hpp"
#include "aoisched/channel.hpp"
#include "aoisched/cmdp.hpp"
#include "aoisched/policy.hpp"

namespace aoisched {

/// One simulated slot, for debugging and trace export.
struct TraceRow {
    long long t = 0;
    long long age = 0;
    int round = 0;
    ActionKind kind = ActionKind::generate;
    int level = 0;  // 0 for off-grid constant-power actions
    double gain = 0.0;
    bool success = false;
};

struct SimOptions {
    long long horizon = 1'000'000;
    std::uint64_t seed = 1;
    /// When true the simulated age wraps to 1 exactly like the truncated
    /// decision model; by default the true, unbounded age is tracked and the
    /// cap only clamps the policy lookup.
    bool truncate_age = false;
    std::vector<TraceRow>* trace = nullptr;
    long long trace_limit = (1LL << 62);
};

struct SimulationStats {
    long long horizon = 0;
    double time_avg_age = 0.0;  // time average of the sampled age plus 1/2
    double avg_transmit_power = 0.0;
    double avg_total_power = 0.0;
    double energy_transmit = 0.0;
    double energy_sensing = 0.0;
    double energy_total = 0.0;
    double energy_efficiency = 0.0;  // transmit energy over total energy
    long long packets_generated = 0;
    long long packets_delivered = 0;
    double delivery_rate = 0.0;
    long long truncation_wraps = 0;
    long long max_age = 0;
    double fraction_minus = 1.0;  // share of slots the higher-power policy was active
};

namespace detail {

/// Deterministic uniform stream: 53-bit doubles in [0, 1) from mt19937_64.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed) : gen_(seed) {}
    double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

inline SimulationStats run_simulation(const PolicyTable& table_minus,
                                      const PolicyTable& table_plus, double redraw_minus,
                                      bool mixed, const StateSpace& space,
                                      const FadingDistribution& dist, const SystemConfig& cfg,
                                      const SimOptions& opts) {
    cfg.validate();
    if (opts.horizon < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
    if (table_minus.size() != static_cast<size_t>(space.size()) ||
        table_plus.size() != static_cast<size_t>(space.size()))
        throw std::invalid_argument("simulate: policy table does not match the state space");
    if (mixed && !(redraw_minus >= 0.0 && redraw_minus <= 1.0))
        throw std::invalid_argument("simulate: redraw probability must lie in [0, 1]");

    UniformStream rng(opts.seed);
    const double sensing = cfg.sensing_power();
    long long age = 1;
    int round = 1;
    bool on_minus = true;
    if (mixed) on_minus = rng.next() < redraw_minus;

    double age_sum = 0.0;
    SimulationStats st;
    st.horizon = opts.horizon;
    long long slots_minus = 0;

    for (long long t = 0; t < opts.horizon; ++t) {
        const long long lookup_age = std::min<long long>(age, cfg.age_cap);
        const int idx = space.index(static_cast<int>(lookup_age), round);
        const PolicyTable& active = on_minus ? table_minus : table_plus;
        const ResolvedAction& ra = active.at(idx);

        const double gain = dist.quantile(rng.next());
        const bool success = gain >= ra.gain_threshold;

        age_sum += static_cast<double>(age);
        st.max_age = std::max(st.max_age, age);
        if (on_minus) ++slots_minus;

        st.energy_transmit += ra.transmit_power;
        if (ra.kind == ActionKind::generate) {
            st.energy_sensing += sensing;
            ++st.packets_generated;
        }
        const bool discarding =
            ra.kind == ActionKind::retransmit && round == cfg.max_rounds && !success;
        if (cfg.charge_sensing_on_discard && discarding) st.energy_sensing += sensing;

        if (opts.trace && t < opts.trace_limit)
            opts.trace->push_back(TraceRow{t, age, round, ra.kind, ra.level, gain, success});

        if (success) {
            ++st.packets_delivered;
            age = ra.kind == ActionKind::generate ? 1 : round;
            round = 1;
            if (mixed) on_minus = rng.next() < redraw_minus;
        } else {
            ++age;
            if (ra.kind == ActionKind::generate)
                round = std::min(2, cfg.max_rounds);
            else
                round = round < cfg.max_rounds ? round + 1 : 1;
            if (opts.truncate_age && age > cfg.age_cap) {
                age = 1;
                round = 1;
                ++st.truncation_wraps;
            }
        }
    }

    const double h = static_cast<double>(opts.horizon);
    st.time_avg_age = age_sum / h + 0.5;
    st.avg_transmit_power = st.energy_transmit / h;
    st.energy_total = st.energy_transmit + st.energy_sensing;
    st.avg_total_power = st.energy_total / h;
    st.energy_efficiency = st.energy_total > 0.0 ? st.energy_transmit / st.energy_total : 0.0;
    st.delivery_rate = static_cast<double>(st.packets_delivered) / h;
    st.fraction_minus = static_cast<double>(slots_minus) / h;
    return st;
}

} // namespace detail

/// Simulate one deterministic policy.  One uniform draw per slot (the channel
/// gain), so runs are reproducible byte-for-byte from the seed.
inline SimulationStats simulate(const PolicyTable& table, const StateSpace& space,
                                const FadingDistribution& dist, const SystemConfig& cfg,
                                const SimOptions& opts = {}) {
    return detail::run_simulation(table, table, 1.0, false, space, dist, cfg, opts);
}

/// Probability of picking the higher-power policy at each delivery renewal so
/// that the long-run fraction of slots it is active equals `xi`.  Renewal
/// cycles under the two policies have different mean lengths, so the naive
/// redraw probability xi would be length-biased; this corrects for it using
/// the long-run delivery rates of the two policies.
inline double mixture_redraw_probability(double xi, double delivery_rate_minus,
                                         double delivery_rate_plus) {
    if (!(xi >= 0.0 && xi <= 1.0))
        throw std::invalid_argument("mixture_redraw_probability: xi must lie in [0, 1]");
    if (xi == 1.0) return 1.0;
    if (xi == 0.0) return 0.0;
    if (!(delivery_rate_minus > 0.0) || !(delivery_rate_plus > 0.0))
        throw std::invalid_argument(
            "mixture_redraw_probability: both policies must deliver with positive rate to "
            "realize a strict mixture via delivery renewals");
    return xi * delivery_rate_minus /
           (xi * delivery_rate_minus + (1.0 - xi) * delivery_rate_plus);
}

/// Simulate the two-policy mixture: the active policy is redrawn at every
/// delivery, picking the higher-power table with probability `redraw_minus`
/// (see mixture_redraw_probability).  Draw order per slot: gain first, then
/// the redraw uniform when a delivery happened.
inline SimulationStats simulate_mixed(const PolicyTable& table_minus,
                                      const PolicyTable& table_plus, double redraw_minus,
                                      const StateSpace& space, const FadingDistribution& dist,
                                      const SystemConfig& cfg, const SimOptions& opts = {}) {
    return detail::run_simulation(table_minus, table_plus, redraw_minus, true, space, dist, cfg,
                                  opts);
}

} // namespace aoisched
