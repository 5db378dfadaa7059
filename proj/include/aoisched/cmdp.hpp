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

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aoisched/channel.hpp"
#include "aoisched/errors.hpp"

namespace aoisched {

/// One slot of the decision process: the age of the freshest delivered update
/// and the transmission round the pending packet would be sent in next.
/// Invariant: age >= 1 and 1 <= round <= min(age, max_rounds).
struct State {
    int age = 1;
    int round = 1;
    friend bool operator==(const State& a, const State& b) {
        return a.age == b.age && a.round == b.round;
    }
};

enum class ActionKind { retransmit, generate };

/// (kind, level): send the pending packet again, or sense a fresh update and
/// send that, in both cases at the 1-based channel power level.
struct Action {
    ActionKind kind = ActionKind::retransmit;
    int level = 1;
    friend bool operator==(const Action& a, const Action& b) {
        return a.kind == b.kind && a.level == b.level;
    }
};

/// Scalar parameters of the scheduling problem.  Powers are in watts.
struct SystemConfig {
    int max_rounds = 4;      // per-packet transmission round budget M
    int age_cap = 100;       // age ceiling of the solver's state space
    double power_budget = 0.5011872336272722;  // average transmit power cap, watts
    double sensing_ratio = 0.5;  // sensing power as a fraction of the budget
    double power_weight = 1.0;   // weight of average total power in the objective
    double discount = 0.999;
    double rate = 1.0;           // spectral efficiency of one slot
    double eta_tol = 1e-6;       // multiplier bisection stopping width
    double value_tol = 1e-9;     // value-iteration sup-norm stopping residual
    long max_iterations = 1000000;  // value-iteration sweep cap
    // Charge the sensing power on the failure branch that discards a packet
    // after its final round (the regeneration implied by that branch is free
    // otherwise).
    bool charge_sensing_on_discard = false;

    double sensing_power() const { return sensing_ratio * power_budget; }

    void validate() const {
        if (max_rounds < 1)
            throw std::invalid_argument("max_rounds must be >= 1");
        if (age_cap < max_rounds)
            throw std::invalid_argument("age_cap (" + std::to_string(age_cap) +
                                        ") must be >= max_rounds (" +
                                        std::to_string(max_rounds) + ")");
        if (!(power_budget > 0.0))
            throw std::invalid_argument("power_budget must be > 0");
        if (!(sensing_ratio >= 0.0))
            throw std::invalid_argument("sensing_ratio must be >= 0");
        if (!(power_weight >= 0.0))
            throw std::invalid_argument("power_weight must be >= 0");
        if (!(discount > 0.0 && discount < 1.0))
            throw std::invalid_argument("discount must lie strictly inside (0,1)");
        if (!(rate > 0.0))
            throw std::invalid_argument("rate must be > 0");
        if (!(eta_tol > 0.0) || !(value_tol > 0.0))
            throw std::invalid_argument("tolerances must be > 0");
        if (max_iterations < 1)
            throw std::invalid_argument("max_iterations must be >= 1");
    }
};

/// Enumeration of all (age, round) pairs with age <= age_cap, age-major with
/// rounds ascending, so index lookups are O(1) offsets.
struct StateSpace {
    int max_rounds = 0;
    int age_cap = 0;
    std::vector<State> states;
    std::vector<int> age_offset;  // age_offset[age] = index of (age, 1); 1-based ages

    int size() const { return static_cast<int>(states.size()); }

    int rounds_at(int age) const { return age < max_rounds ? age : max_rounds; }

    int index(const State& s) const { return index(s.age, s.round); }

    int index(int age, int round) const {
        if (age < 1 || age > age_cap)
            throw std::out_of_range("state age " + std::to_string(age) + " outside [1, " +
                                    std::to_string(age_cap) + "]");
        if (round < 1 || round > rounds_at(age))
            throw std::out_of_range("state round " + std::to_string(round) +
                                    " invalid at age " + std::to_string(age));
        return age_offset[static_cast<size_t>(age)] + round - 1;
    }

    const State& state(int idx) const { return states.at(static_cast<size_t>(idx)); }
};

inline StateSpace build_state_space(int max_rounds, int age_cap) {
    if (max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
    if (age_cap < max_rounds)
        throw std::invalid_argument("age_cap must be >= max_rounds");
    StateSpace sp;
    sp.max_rounds = max_rounds;
    sp.age_cap = age_cap;
    sp.age_offset.assign(static_cast<size_t>(age_cap) + 1, 0);
    for (int age = 1; age <= age_cap; ++age) {
        sp.age_offset[static_cast<size_t>(age)] = static_cast<int>(sp.states.size());
        for (int round = 1; round <= sp.rounds_at(age); ++round)
            sp.states.push_back(State{age, round});
    }
    return sp;
}

inline StateSpace build_state_space(const SystemConfig& cfg) {
    return build_state_space(cfg.max_rounds, cfg.age_cap);
}

/// Successor when the slot fails.  Retransmissions advance the round, and a
/// packet that just spent its final round is dropped (round resets to 1).  A
/// fresh packet that fails its first slot waits in round 2, except when the
/// round budget is 1 and it is dropped immediately.  Ages past the cap wrap
/// to (1,1).
inline State next_state_on_failure(const State& s, ActionKind kind, const SystemConfig& cfg) {
    State next;
    next.age = s.age + 1;
    if (kind == ActionKind::retransmit)
        next.round = s.round < cfg.max_rounds ? s.round + 1 : 1;
    else
        next.round = cfg.max_rounds >= 2 ? 2 : 1;
    if (next.age > cfg.age_cap) return State{1, 1};
    return next;
}

/// Successor when the slot succeeds: the delivered update was sensed
/// `round` slots ago under retransmit, this slot under generate.
inline State next_state_on_success(const State& s, ActionKind kind) {
    if (kind == ActionKind::retransmit) return State{s.round, 1};
    return State{1, 1};
}

/// One-step distribution over successor states; entries with zero probability
/// are dropped and duplicate successors merged.
inline std::vector<std::pair<State, double>> transitions(const State& s, const Action& a,
                                                         const ChannelModel& model,
                                                         const SystemConfig& cfg) {
    if (s.round > (s.age < cfg.max_rounds ? s.age : cfg.max_rounds) || s.round < 1 ||
        s.age < 1 || s.age > cfg.age_cap)
        throw std::invalid_argument("transitions: state violates round <= min(age, max_rounds)");
    const double eps = model.failure(a.level);
    const State fail = next_state_on_failure(s, a.kind, cfg);
    const State succ = next_state_on_success(s, a.kind);

    std::vector<std::pair<State, double>> out;
    if (fail == succ) {
        out.emplace_back(fail, 1.0);
        return out;
    }
    if (eps > 0.0) out.emplace_back(fail, eps);
    if (eps < 1.0) out.emplace_back(succ, 1.0 - eps);
    return out;
}

/// Per-slot power draw of an action: `transmit` is what counts against the
/// power budget, `total` additionally carries the sensing power of a
/// generate action.
struct SlotCost {
    double transmit = 0.0;
    double total = 0.0;
};

inline SlotCost slot_cost(const Action& a, const ChannelModel& model, const SystemConfig& cfg) {
    SlotCost c;
    c.transmit = model.power(a.level);
    c.total = c.transmit + (a.kind == ActionKind::generate ? cfg.sensing_power() : 0.0);
    return c;
}

/// Scalarized one-slot cost minimized by the solver: the age integral over
/// the slot (age + 1/2), the weighted total power, and the constraint term
/// eta times the budgeted transmit power.
inline double lagrangian_reward(const State& s, const Action& a, const ChannelModel& model,
                                const SystemConfig& cfg, double eta) {
    const SlotCost c = slot_cost(a, model, cfg);
    return (s.age + 0.5) + cfg.power_weight * c.total + eta * c.transmit;
}

inline const char* to_string(ActionKind k) {
    return k == ActionKind::retransmit ? "r" : "g";
}

inline ActionKind action_kind_from_string(const std::string& s) {
    if (s == "r" || s == "retransmit") return ActionKind::retransmit;
    if (s == "g" || s == "generate") return ActionKind::generate;
    throw std::invalid_argument("unknown action kind: " + s);
}

} // namespace aoisched
