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
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aoisched/cmdp.hpp"
#include "aoisched/policy.hpp"

namespace aoisched {

/// Sparse row-major Markov chain induced by a stationary policy.  Row i holds
/// the successor distribution of state i; `anchor` is the state every
/// stationary query is rooted at (the fresh (1,1) state for policy chains).
struct InducedChain {
    std::vector<std::vector<std::pair<int, double>>> rows;
    int anchor = 0;

    int size() const { return static_cast<int>(rows.size()); }
};

inline InducedChain induced_chain(const PolicyTable& table, const StateSpace& space,
                                  const SystemConfig& cfg) {
    if (table.size() != space.size())
        throw std::invalid_argument("induced_chain: policy size does not match state space");
    InducedChain chain;
    chain.rows.resize(static_cast<size_t>(space.size()));
    chain.anchor = space.index(1, 1);
    for (int i = 0; i < space.size(); ++i) {
        const State& s = space.state(i);
        const ResolvedAction& a = table.at(i);
        const int fail = space.index(next_state_on_failure(s, a.kind, cfg));
        const int succ = space.index(next_state_on_success(s, a.kind));
        auto& row = chain.rows[static_cast<size_t>(i)];
        if (fail == succ) {
            row.emplace_back(fail, 1.0);
        } else {
            if (a.fail_prob > 0.0) row.emplace_back(fail, a.fail_prob);
            if (a.fail_prob < 1.0) row.emplace_back(succ, 1.0 - a.fail_prob);
        }
    }
    return chain;
}

namespace detail {

inline std::vector<int> reachable_from_anchor(const InducedChain& chain) {
    std::vector<char> seen(static_cast<size_t>(chain.size()), 0);
    std::vector<int> order;
    order.reserve(chain.rows.size());
    order.push_back(chain.anchor);
    seen[static_cast<size_t>(chain.anchor)] = 1;
    for (size_t head = 0; head < order.size(); ++head) {
        for (const auto& [next, prob] : chain.rows[static_cast<size_t>(order[head])]) {
            if (prob > 0.0 && !seen[static_cast<size_t>(next)]) {
                seen[static_cast<size_t>(next)] = 1;
                order.push_back(next);
            }
        }
    }
    std::sort(order.begin(), order.end());
    return order;
}

inline double stationarity_residual(const InducedChain& chain, const std::vector<double>& pi) {
    std::vector<double> flow(pi.size(), 0.0);
    for (size_t i = 0; i < chain.rows.size(); ++i)
        for (const auto& [next, prob] : chain.rows[i])
            flow[static_cast<size_t>(next)] += pi[i] * prob;
    double res = 0.0;
    for (size_t i = 0; i < pi.size(); ++i) res = std::max(res, std::abs(flow[i] - pi[i]));
    return res;
}

/// Power iteration on the half-lazy chain (I + P)/2, which has the same
/// stationary distribution but cannot be periodic.  Fallback for the rare
/// case the direct solve degenerates.
inline bool lazy_power_iteration(const InducedChain& chain, const std::vector<int>& keep,
                                 std::vector<double>& pi) {
    std::vector<char> kept(pi.size(), 0);
    for (int i : keep) kept[static_cast<size_t>(i)] = 1;
    std::fill(pi.begin(), pi.end(), 0.0);
    pi[static_cast<size_t>(chain.anchor)] = 1.0;
    std::vector<double> next(pi.size(), 0.0);
    for (long iter = 0; iter < 2000000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int i : keep) {
            const double mass = pi[static_cast<size_t>(i)];
            if (mass == 0.0) continue;
            next[static_cast<size_t>(i)] += 0.5 * mass;
            for (const auto& [to, prob] : chain.rows[static_cast<size_t>(i)])
                next[static_cast<size_t>(to)] += 0.5 * mass * prob;
        }
        double diff = 0.0, total = 0.0;
        for (size_t i = 0; i < pi.size(); ++i) {
            if (!kept[i]) continue;
            diff = std::max(diff, std::abs(next[i] - pi[i]));
            total += next[i];
        }
        for (size_t i = 0; i < pi.size(); ++i) pi[i] = kept[i] ? next[i] / total : 0.0;
        if (diff < 1e-14 && stationarity_residual(chain, pi) <= 1e-10) return true;
    }
    return stationarity_residual(chain, pi) <= 1e-10;
}

} // namespace detail

/// Stationary distribution of the chain restricted to the states reachable
/// from the anchor; unreachable states carry zero mass.  Solved directly as a
/// dense linear system (the state spaces here are small), with a lazy power
/// iteration as fallback.  The result satisfies pi P = pi with residual at
/// most 1e-10 or a SolverError is thrown.
inline std::vector<double> steady_state(const InducedChain& chain) {
    if (chain.size() == 0) throw std::invalid_argument("steady_state: empty chain");
    const std::vector<int> keep = detail::reachable_from_anchor(chain);
    const int n = static_cast<int>(keep.size());
    std::vector<int> where(static_cast<size_t>(chain.size()), -1);
    for (int j = 0; j < n; ++j) where[static_cast<size_t>(keep[static_cast<size_t>(j)])] = j;

    // Balance equations (P^T - I) pi = 0 over the reachable set, with the
    // last (linearly dependent) row replaced by the normalization sum pi = 1.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        const int from = keep[static_cast<size_t>(j)];
        for (const auto& [to, prob] : chain.rows[static_cast<size_t>(from)]) {
            const int wi = where[static_cast<size_t>(to)];
            if (wi >= 0) a(wi, j) += prob;
        }
        a(j, j) -= 1.0;
    }
    for (int j = 0; j < n; ++j) a(n - 1, j) = 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;

    Eigen::VectorXd x = a.partialPivLu().solve(b);

    std::vector<double> pi(static_cast<size_t>(chain.size()), 0.0);
    bool ok = x.allFinite();
    if (ok) {
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            double v = x(j);
            if (v < 0.0) {
                if (v < -1e-9) { ok = false; break; }
                v = 0.0;  // clip solver noise at the feasibility boundary
            }
            pi[static_cast<size_t>(keep[static_cast<size_t>(j)])] = v;
            total += v;
        }
        if (ok) {
            for (double& v : pi) v /= total;
            ok = detail::stationarity_residual(chain, pi) <= 1e-10;
        }
    }
    if (!ok && !detail::lazy_power_iteration(chain, keep, pi))
        throw SolverError("steady_state: no distribution met the 1e-10 residual bound");
    return pi;
}

/// Long-run averages of a stationary policy.  avg_age integrates the age
/// ramp across each slot (the +1/2 term) when includes_half_slot is set;
/// energy_efficiency is the budgeted transmit share of all power spent and
/// is reported as 0 for a policy that never transmits.
struct Metrics {
    double avg_age = 0.0;
    double avg_transmit_power = 0.0;
    double avg_total_power = 0.0;
    double energy_efficiency = 0.0;
    double generation_rate = 0.0;
    bool includes_half_slot = true;
};

inline Metrics average_metrics(const std::vector<double>& pi, const PolicyTable& table,
                               const StateSpace& space, const SystemConfig& cfg,
                               bool half_slot = true) {
    if (static_cast<int>(pi.size()) != space.size() || table.size() != space.size())
        throw std::invalid_argument("average_metrics: size mismatch");
    Metrics m;
    m.includes_half_slot = half_slot;
    for (int i = 0; i < space.size(); ++i) {
        const double w = pi[static_cast<size_t>(i)];
        if (w == 0.0) continue;
        const State& s = space.state(i);
        const ResolvedAction& a = table.at(i);
        m.avg_age += w * s.age;
        m.avg_transmit_power += w * a.transmit_power;
        double total = a.total_power;
        if (cfg.charge_sensing_on_discard && a.kind == ActionKind::retransmit &&
            s.round == cfg.max_rounds)
            total += a.fail_prob * cfg.sensing_power();
        m.avg_total_power += w * total;
        if (a.kind == ActionKind::generate) m.generation_rate += w;
    }
    if (half_slot) m.avg_age += 0.5;
    m.energy_efficiency = m.avg_total_power > 0.0 ? m.avg_transmit_power / m.avg_total_power : 0.0;
    return m;
}

/// Expected deliveries per slot under the stationary distribution.
inline double delivery_rate(const std::vector<double>& pi, const PolicyTable& table) {
    if (pi.size() != static_cast<size_t>(table.size()))
        throw std::invalid_argument("delivery_rate: size mismatch");
    double rate = 0.0;
    for (size_t i = 0; i < pi.size(); ++i)
        rate += pi[i] * (1.0 - table.entries[i].fail_prob);
    return rate;
}

/// Averages of the randomized policy that follows the first component with
/// probability xi: every time-average mixes affinely, and the efficiency is
/// re-derived from the mixed powers rather than mixed itself.
inline Metrics mix_metrics(const Metrics& lo, const Metrics& hi, double xi) {
    if (!(xi >= 0.0 && xi <= 1.0))
        throw std::invalid_argument("mix_metrics: xi outside [0,1]");
    if (lo.includes_half_slot != hi.includes_half_slot)
        throw std::invalid_argument("mix_metrics: inconsistent age conventions");
    Metrics m;
    m.includes_half_slot = lo.includes_half_slot;
    m.avg_age = xi * lo.avg_age + (1.0 - xi) * hi.avg_age;
    m.avg_transmit_power = xi * lo.avg_transmit_power + (1.0 - xi) * hi.avg_transmit_power;
    m.avg_total_power = xi * lo.avg_total_power + (1.0 - xi) * hi.avg_total_power;
    m.generation_rate = xi * lo.generation_rate + (1.0 - xi) * hi.generation_rate;
    m.energy_efficiency = m.avg_total_power > 0.0 ? m.avg_transmit_power / m.avg_total_power : 0.0;
    return m;
}

} // namespace aoisched
