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
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "aoisched/channel.hpp"
#include "aoisched/cmdp.hpp"

namespace aoisched {

/// Deterministic stationary policy over a StateSpace, one quantized action
/// per state, aligned with the state enumeration order.
struct Policy {
    std::vector<Action> actions;

    friend bool operator==(const Policy& a, const Policy& b) {
        return a.actions == b.actions;
    }
};

/// A policy entry with its physics resolved: what is sent, at what power,
/// with what failure probability.  `level` is 0 for powers that sit off the
/// quantized grid (baseline policies with a continuous power knob).
struct ResolvedAction {
    ActionKind kind = ActionKind::retransmit;
    int level = 0;
    double transmit_power = 0.0;
    double total_power = 0.0;
    double fail_prob = 1.0;
    double gain_threshold = 0.0;
};

/// Per-state resolved policy; the form consumed by chain analysis and the
/// simulator.  Entries are aligned with the owning StateSpace.
struct PolicyTable {
    std::vector<ResolvedAction> entries;

    const ResolvedAction& at(int idx) const { return entries.at(static_cast<size_t>(idx)); }
    int size() const { return static_cast<int>(entries.size()); }
};

inline PolicyTable resolve_policy(const Policy& policy, const StateSpace& space,
                                  const ChannelModel& model, const SystemConfig& cfg) {
    if (static_cast<int>(policy.actions.size()) != space.size())
        throw std::invalid_argument("resolve_policy: policy size does not match state space");
    PolicyTable table;
    table.entries.reserve(policy.actions.size());
    for (const Action& a : policy.actions) {
        ResolvedAction r;
        r.kind = a.kind;
        r.level = a.level;
        r.transmit_power = model.power(a.level);
        r.total_power = r.transmit_power +
                        (a.kind == ActionKind::generate ? cfg.sensing_power() : 0.0);
        r.fail_prob = model.failure(a.level);
        r.gain_threshold = model.threshold(a.level);
        table.entries.push_back(r);
    }
    return table;
}

namespace detail {

inline ResolvedAction constant_power_action(ActionKind kind, double power_watts,
                                            const FadingDistribution& dist,
                                            const SystemConfig& cfg) {
    if (!(power_watts > 0.0))
        throw std::invalid_argument("baseline power must be > 0 watts");
    ResolvedAction r;
    r.kind = kind;
    r.level = 0;
    r.transmit_power = power_watts;
    r.total_power = power_watts + (kind == ActionKind::generate ? cfg.sensing_power() : 0.0);
    r.gain_threshold = gain_threshold_for_power(power_watts, cfg.rate);
    r.fail_prob = dist.cdf(r.gain_threshold);
    return r;
}

/// Nearest quantized level by transmit power (ties resolve to the stronger
/// level).
inline int nearest_level(double power_watts, const ChannelModel& model) {
    int best = 1;
    double best_gap = std::abs(model.power(1) - power_watts);
    for (int k = 2; k <= model.levels; ++k) {
        const double gap = std::abs(model.power(k) - power_watts);
        if (gap < best_gap) {
            best = k;
            best_gap = gap;
        }
    }
    return best;
}

} // namespace detail

/// Sense-and-send-every-slot reference policy at a fixed transmit power: the
/// pending packet is never retried.
inline PolicyTable baseline_generation(double power_watts, const FadingDistribution& dist,
                                       const StateSpace& space, const SystemConfig& cfg) {
    const ResolvedAction g =
        detail::constant_power_action(ActionKind::generate, power_watts, dist, cfg);
    PolicyTable table;
    table.entries.assign(static_cast<size_t>(space.size()), g);
    return table;
}

/// Persistent-retry reference policy at a fixed transmit power: a packet is
/// retried until it is delivered or runs out of rounds, then a fresh one is
/// sensed.  Round 1 states hold no pending packet, so they sense.  With a
/// round budget of 1 this collapses to the generation policy.
inline PolicyTable baseline_retransmission(double power_watts, const FadingDistribution& dist,
                                           const StateSpace& space, const SystemConfig& cfg) {
    const ResolvedAction g =
        detail::constant_power_action(ActionKind::generate, power_watts, dist, cfg);
    const ResolvedAction r =
        detail::constant_power_action(ActionKind::retransmit, power_watts, dist, cfg);
    PolicyTable table;
    table.entries.reserve(static_cast<size_t>(space.size()));
    for (int i = 0; i < space.size(); ++i)
        table.entries.push_back(space.state(i).round == 1 ? g : r);
    return table;
}

/// Variants of the reference policies that snap the power knob to the nearest
/// quantized channel level.
inline PolicyTable baseline_generation_quantized(double power_watts, const ChannelModel& model,
                                                 const StateSpace& space,
                                                 const SystemConfig& cfg) {
    const int level = detail::nearest_level(power_watts, model);
    Policy p;
    p.actions.assign(static_cast<size_t>(space.size()), Action{ActionKind::generate, level});
    return resolve_policy(p, space, model, cfg);
}

inline PolicyTable baseline_retransmission_quantized(double power_watts,
                                                     const ChannelModel& model,
                                                     const StateSpace& space,
                                                     const SystemConfig& cfg) {
    const int level = detail::nearest_level(power_watts, model);
    Policy p;
    p.actions.reserve(static_cast<size_t>(space.size()));
    for (int i = 0; i < space.size(); ++i)
        p.actions.push_back(Action{space.state(i).round == 1 ? ActionKind::generate
                                                             : ActionKind::retransmit,
                                   level});
    return resolve_policy(p, space, model, cfg);
}

} // namespace aoisched
