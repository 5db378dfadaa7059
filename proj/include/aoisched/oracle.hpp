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
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aoisched/chain.hpp"
#include "aoisched/cmdp.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/policy.hpp"
#include "aoisched/solver.hpp"

namespace aoisched {

struct OracleOptions {
    /// Hard cap on the number of deterministic policies the search may touch.
    long long policy_cap = 10'000'000;
};

/// Exact long-run metrics of one deterministic policy via its induced chain.
inline Metrics oracle_evaluate(const Policy& policy, const StateSpace& space,
                               const ChannelModel& model, const SystemConfig& cfg) {
    const PolicyTable table = resolve_policy(policy, space, model, cfg);
    const std::vector<double> pi = steady_state(induced_chain(table, space, cfg));
    return average_metrics(pi, table, space, cfg);
}

namespace detail {

inline Action decode_action(int code, int levels) {
    if (code < levels) return Action{ActionKind::retransmit, code + 1};
    return Action{ActionKind::generate, code - levels + 1};
}

} // namespace detail

/// Visit every deterministic policy exactly once, in mixed-radix order over
/// the (kind, level) code of each state.  Throws before visiting anything if
/// the total count exceeds `cap`.  Returns the number of policies visited.
template <typename Visitor>
long long enumerate_policies(const StateSpace& space, int levels, long long cap,
                             Visitor&& visit) {
    if (levels < 1) throw std::invalid_argument("enumerate_policies: levels must be >= 1");
    const int n = space.size();
    const long long radix = 2LL * levels;
    long long total = 1;
    for (int i = 0; i < n; ++i) {
        if (total > cap / radix)
            throw std::invalid_argument(
                "enumerate_policies: policy count exceeds the cap; raise the cap to proceed");
        total *= radix;
    }
    std::vector<int> digits(static_cast<size_t>(n), 0);
    Policy policy;
    policy.actions.resize(static_cast<size_t>(n));
    for (long long visited = 0;; ++visited) {
        for (int i = 0; i < n; ++i)
            policy.actions[static_cast<size_t>(i)] =
                detail::decode_action(digits[static_cast<size_t>(i)], levels);
        visit(static_cast<const Policy&>(policy));
        int pos = 0;
        while (pos < n) {
            if (++digits[static_cast<size_t>(pos)] < radix) break;
            digits[static_cast<size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == n) return visited + 1;
    }
}

namespace detail {

/// Per-(state, action-code) data the exhaustive search needs, flattened for
/// cache-friendly access.  `sense` is the expected number of sensing events
/// per slot for that cell (1 for generate; the failure probability for a
/// final-round retransmit when the discard-accounting mode charges it), kept
/// separate from the transmit power because the sensing power scales with
/// the queried budget.
struct OracleTables {
    int states = 0;
    int codes = 0;
    std::vector<int> fail, succ;
    std::vector<double> eps, transmit, sense, age_half;  // age_half is age + 1/2

    OracleTables(const StateSpace& space, const ChannelModel& model, const SystemConfig& cfg) {
        states = space.size();
        codes = 2 * model.levels;
        const size_t cells = static_cast<size_t>(states) * static_cast<size_t>(codes);
        fail.resize(cells);
        succ.resize(cells);
        eps.resize(cells);
        transmit.resize(cells);
        sense.resize(cells);
        age_half.resize(cells);
        for (int i = 0; i < states; ++i) {
            const State& s = space.state(i);
            for (int code = 0; code < codes; ++code) {
                const Action a = decode_action(code, model.levels);
                const size_t c = cell(i, code);
                fail[c] = space.index(next_state_on_failure(s, a.kind, cfg));
                succ[c] = space.index(next_state_on_success(s, a.kind));
                eps[c] = model.failure(a.level);
                transmit[c] = model.power(a.level);
                double sr = a.kind == ActionKind::generate ? 1.0 : 0.0;
                if (cfg.charge_sensing_on_discard && a.kind == ActionKind::retransmit &&
                    s.round == cfg.max_rounds)
                    sr = model.failure(a.level);
                sense[c] = sr;
                age_half[c] = s.age + 0.5;
            }
        }
    }

    size_t cell(int state, int code) const {
        return static_cast<size_t>(state) * static_cast<size_t>(codes) +
               static_cast<size_t>(code);
    }
};

/// Budget-independent long-run averages of one deterministic policy.
struct PointAverages {
    double transmit = 0.0;    // average transmit power
    double age = 0.0;         // average age including the half-slot term
    double sense_rate = 0.0;  // sensing events per slot
};

/// Exact stationary-average evaluation of a policy restricted to the states
/// it can actually reach, by dense Gaussian elimination on at most 64 states.
/// No allocation happens per evaluation.
class RestrictedEvaluator {
public:
    static constexpr int kMaxStates = 64;

    RestrictedEvaluator(const StateSpace& space, const ChannelModel& model,
                        const SystemConfig& cfg)
        : tables_(space, model, cfg), local_(static_cast<size_t>(space.size()), -1) {
        if (space.size() > kMaxStates)
            throw std::invalid_argument("oracle: exhaustive search supports at most 64 states");
    }

    const OracleTables& tables() const { return tables_; }

    /// `order[0..count)` lists the reachable states (global indices) and
    /// `codes[global]` their assigned action codes.
    PointAverages evaluate(const std::vector<int>& order, size_t count,
                           const std::vector<int>& codes) {
        const int n = static_cast<int>(count);
        const int stride = n + 1;
        for (int i = 0; i < n; ++i)
            local_[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;

        // A = transpose(P) - I with the last row replaced by the
        // normalization sum(pi) = 1; solve the augmented system A pi = e_n.
        for (int r = 0; r < n; ++r) {
            double* row = a(r, stride);
            for (int c = 0; c <= n; ++c) row[static_cast<size_t>(c)] = 0.0;
        }
        for (int i = 0; i < n; ++i) {
            const int g = order[static_cast<size_t>(i)];
            const size_t cell = tables_.cell(g, codes[static_cast<size_t>(g)]);
            const double e = tables_.eps[cell];
            if (e > 0.0)
                a(local_[static_cast<size_t>(tables_.fail[cell])],
                  stride)[static_cast<size_t>(i)] += e;
            if (e < 1.0)
                a(local_[static_cast<size_t>(tables_.succ[cell])],
                  stride)[static_cast<size_t>(i)] += 1.0 - e;
            a(i, stride)[static_cast<size_t>(i)] -= 1.0;
        }
        {
            double* last = a(n - 1, stride);
            for (int c = 0; c < n; ++c) last[static_cast<size_t>(c)] = 1.0;
            last[static_cast<size_t>(n)] = 1.0;
        }

        for (int col = 0; col < n; ++col) {
            int piv = col;
            double best = std::abs(a(col, stride)[static_cast<size_t>(col)]);
            for (int r = col + 1; r < n; ++r) {
                const double v = std::abs(a(r, stride)[static_cast<size_t>(col)]);
                if (v > best) {
                    best = v;
                    piv = r;
                }
            }
            if (best == 0.0) throw SolverError("oracle: singular chain system");
            if (piv != col) {
                double* rp = a(piv, stride);
                double* rc = a(col, stride);
                for (int c = col; c <= n; ++c)
                    std::swap(rp[static_cast<size_t>(c)], rc[static_cast<size_t>(c)]);
            }
            const double* prow = a(col, stride);
            const double inv = 1.0 / prow[static_cast<size_t>(col)];
            for (int r = col + 1; r < n; ++r) {
                double* row = a(r, stride);
                const double f = row[static_cast<size_t>(col)] * inv;
                if (f == 0.0) continue;
                for (int c = col; c <= n; ++c)
                    row[static_cast<size_t>(c)] -= f * prow[static_cast<size_t>(c)];
            }
        }
        for (int r = n - 1; r >= 0; --r) {
            const double* row = a(r, stride);
            double v = row[static_cast<size_t>(n)];
            for (int c = r + 1; c < n; ++c)
                v -= row[static_cast<size_t>(c)] * pi_[static_cast<size_t>(c)];
            pi_[static_cast<size_t>(r)] = v / row[static_cast<size_t>(r)];
        }

        PointAverages out;
        for (int i = 0; i < n; ++i) {
            double p = pi_[static_cast<size_t>(i)];
            if (p < 0.0) {
                if (p < -1e-9) throw SolverError("oracle: negative stationary probability");
                p = 0.0;
            }
            const int g = order[static_cast<size_t>(i)];
            const size_t cell = tables_.cell(g, codes[static_cast<size_t>(g)]);
            out.transmit += p * tables_.transmit[cell];
            out.age += p * tables_.age_half[cell];
            out.sense_rate += p * tables_.sense[cell];
        }
        for (int i = 0; i < n; ++i)
            local_[static_cast<size_t>(order[static_cast<size_t>(i)])] = -1;
        return out;
    }

private:
    double* a(int row, int stride) {
        return &a_[static_cast<size_t>(row) * static_cast<size_t>(stride)];
    }

    OracleTables tables_;
    std::vector<int> local_;
    double a_[static_cast<size_t>(kMaxStates) * static_cast<size_t>(kMaxStates + 1)]{};
    double pi_[static_cast<size_t>(kMaxStates)]{};
};

struct FrontierEntry {
    double objective = 0.0;
    double age = 0.0;
    double total = 0.0;
    std::vector<Action> actions;  // full policy, silent filler on unreachable states
};

/// Pareto frontier over (transmit power, objective), both minimized.  Kept as
/// a map from transmit power to the unique non-dominated entry, so objective
/// values are strictly decreasing along increasing power.
class ParetoFrontier {
public:
    void insert(double transmit, double objective, double age, double total,
                const std::vector<int>& order, size_t count, const std::vector<int>& codes,
                int n_states, int levels) {
        auto it = points_.lower_bound(transmit);
        if (it != points_.begin()) {
            auto prev = std::prev(it);
            if (prev->second.objective <= objective) return;  // dominated
        }
        if (it != points_.end() && it->first == transmit) {
            if (it->second.objective <= objective) return;
            it = points_.erase(it);
        }
        while (it != points_.end() && it->second.objective >= objective)
            it = points_.erase(it);
        FrontierEntry e;
        e.objective = objective;
        e.age = age;
        e.total = total;
        e.actions.assign(static_cast<size_t>(n_states), Action{ActionKind::generate, levels});
        for (size_t i = 0; i < count; ++i) {
            const int g = order[i];
            e.actions[static_cast<size_t>(g)] =
                decode_action(codes[static_cast<size_t>(g)], levels);
        }
        points_.emplace(transmit, std::move(e));
    }

    const std::map<double, FrontierEntry>& points() const { return points_; }

private:
    std::map<double, FrontierEntry> points_;
};

/// Depth-first enumeration over policies restricted to their reachable set:
/// actions are assigned in discovery order starting from the anchor state, so
/// each distinct reachable-restricted assignment is produced exactly once and
/// unreachable states never multiply the search.  Zero-probability branches
/// do not extend the reachable set.
template <typename Visitor>
class ReachableSearch {
public:
    ReachableSearch(const StateSpace& space, const ChannelModel& model,
                    const SystemConfig& cfg, long long policy_cap, Visitor& visit)
        : space_(&space),
          cap_(policy_cap),
          evaluator_(space, model, cfg),
          visit_(&visit),
          codes_(static_cast<size_t>(space.size()), -1),
          in_order_(static_cast<size_t>(space.size()), 0) {}

    /// Runs the search; returns the number of policies evaluated.
    long long run() {
        leaves_ = 0;
        order_.clear();
        const int anchor = space_->index(1, 1);
        order_.push_back(anchor);
        in_order_[static_cast<size_t>(anchor)] = 1;
        descend(0);
        in_order_[static_cast<size_t>(anchor)] = 0;
        order_.clear();
        return leaves_;
    }

private:
    void descend(size_t pos) {
        if (pos == order_.size()) {
            if (++leaves_ > cap_)
                throw SolverError(
                    "oracle: exhaustive search exceeded the policy cap; raise the cap");
            const PointAverages avg = evaluator_.evaluate(order_, order_.size(), codes_);
            (*visit_)(avg, order_, order_.size(), codes_);
            return;
        }
        const int g = order_[pos];
        const OracleTables& t = evaluator_.tables();
        for (int code = 0; code < t.codes; ++code) {
            codes_[static_cast<size_t>(g)] = code;
            const size_t cell = t.cell(g, code);
            const size_t before = order_.size();
            if (t.eps[cell] > 0.0) discover(t.fail[cell]);
            if (t.eps[cell] < 1.0) discover(t.succ[cell]);
            descend(pos + 1);
            while (order_.size() > before) {
                in_order_[static_cast<size_t>(order_.back())] = 0;
                order_.pop_back();
            }
        }
        codes_[static_cast<size_t>(g)] = -1;
    }

    void discover(int state) {
        if (!in_order_[static_cast<size_t>(state)]) {
            in_order_[static_cast<size_t>(state)] = 1;
            order_.push_back(state);
        }
    }

    const StateSpace* space_;
    long long cap_;
    RestrictedEvaluator evaluator_;
    Visitor* visit_;
    std::vector<int> codes_;
    std::vector<char> in_order_;
    std::vector<int> order_;
    long long leaves_ = 0;
};

} // namespace detail

/// Ground-truth constrained optimum for one transmit-power budget: the best
/// mixture of two deterministic policies on the lower convex hull of the
/// Pareto frontier.
struct OracleSolution {
    double budget = 0.0;
    double objective = 0.0;        // mixed age + weight * total power
    double avg_age = 0.0;          // mixed
    double avg_total_power = 0.0;  // mixed
    double avg_transmit_power = 0.0;
    double xi = 1.0;  // weight on the higher-power endpoint
    bool constraint_active = false;
    Policy policy_minus, policy_plus;  // higher-power / lower-power endpoints
    double transmit_minus = 0.0, transmit_plus = 0.0;
    double objective_minus = 0.0, objective_plus = 0.0;
    long long policies_evaluated = 0;
};

/// Exhaustively solve the constrained problem for several budgets at once,
/// sharing one enumeration pass.  The sensing power is proportional to the
/// budget, so each budget keeps its own frontier while the expensive
/// stationary analysis is budget-independent and done once per policy.
/// Budgets must be nonnegative.
inline std::vector<OracleSolution> oracle_solve_many(const StateSpace& space,
                                                     const ChannelModel& model,
                                                     const SystemConfig& cfg,
                                                     const std::vector<double>& budgets,
                                                     const OracleOptions& options = {}) {
    cfg.validate();
    if (model.rate != cfg.rate)
        throw std::invalid_argument("oracle: channel rate differs from configured rate");
    for (double b : budgets)
        if (!(b >= 0.0)) throw std::invalid_argument("oracle: budgets must be nonnegative");

    std::vector<detail::ParetoFrontier> frontiers(budgets.size());
    const int n_states = space.size();
    const int levels = model.levels;
    auto visitor = [&](const detail::PointAverages& avg, const std::vector<int>& order,
                       size_t count, const std::vector<int>& codes) {
        for (size_t bi = 0; bi < budgets.size(); ++bi) {
            const double sensing = cfg.sensing_ratio * budgets[bi];
            const double total = avg.transmit + sensing * avg.sense_rate;
            const double objective = avg.age + cfg.power_weight * total;
            frontiers[bi].insert(avg.transmit, objective, avg.age, total, order, count, codes,
                                 n_states, levels);
        }
    };
    detail::ReachableSearch<decltype(visitor)> search(space, model, cfg, options.policy_cap,
                                                      visitor);
    const long long evaluated = search.run();

    std::vector<OracleSolution> out;
    out.reserve(budgets.size());
    for (size_t bi = 0; bi < budgets.size(); ++bi) {
        const double budget = budgets[bi];
        const auto& points = frontiers[bi].points();
        if (points.empty()) throw SolverError("oracle: empty frontier");

        // Vertices of the lower convex hull of the frontier, by power.
        struct Vertex {
            double transmit;
            const detail::FrontierEntry* entry;
        };
        std::vector<Vertex> hull;
        for (const auto& [transmit, entry] : points) {
            Vertex v{transmit, &entry};
            while (hull.size() >= 2) {
                const Vertex& a = hull[hull.size() - 2];
                const Vertex& b = hull[hull.size() - 1];
                const double lhs =
                    (b.entry->objective - a.entry->objective) * (v.transmit - b.transmit);
                const double rhs =
                    (v.entry->objective - b.entry->objective) * (b.transmit - a.transmit);
                if (lhs >= rhs)
                    hull.pop_back();
                else
                    break;
            }
            hull.push_back(v);
        }

        auto pure = [&](const Vertex& v, bool active) {
            OracleSolution s;
            s.budget = budget;
            s.objective = v.entry->objective;
            s.avg_age = v.entry->age;
            s.avg_total_power = v.entry->total;
            s.avg_transmit_power = v.transmit;
            s.xi = 1.0;
            s.constraint_active = active;
            s.policy_minus.actions = v.entry->actions;
            s.policy_plus.actions = v.entry->actions;
            s.transmit_minus = s.transmit_plus = v.transmit;
            s.objective_minus = s.objective_plus = v.entry->objective;
            s.policies_evaluated = evaluated;
            return s;
        };

        const Vertex& best = hull.back();  // unconstrained optimum
        if (budget >= best.transmit) {
            out.push_back(pure(best, false));
            continue;
        }
        if (budget < hull.front().transmit - 1e-12)
            throw SolverError("oracle: budget below the cheapest achievable transmit power");
        size_t hi = 1;
        while (hi < hull.size() && hull[hi].transmit <= budget) ++hi;
        const Vertex& lo_v = hull[hi - 1];  // affordable endpoint
        if (lo_v.transmit == budget) {
            out.push_back(pure(lo_v, true));
            continue;
        }
        const Vertex& hi_v = hull[hi];
        const double xi = mixture_coefficient(hi_v.transmit, lo_v.transmit, budget);
        OracleSolution s;
        s.budget = budget;
        s.xi = xi;
        s.constraint_active = true;
        s.policy_minus.actions = hi_v.entry->actions;
        s.policy_plus.actions = lo_v.entry->actions;
        s.transmit_minus = hi_v.transmit;
        s.transmit_plus = lo_v.transmit;
        s.objective_minus = hi_v.entry->objective;
        s.objective_plus = lo_v.entry->objective;
        s.avg_transmit_power = xi * hi_v.transmit + (1.0 - xi) * lo_v.transmit;
        s.avg_age = xi * hi_v.entry->age + (1.0 - xi) * lo_v.entry->age;
        s.avg_total_power = xi * hi_v.entry->total + (1.0 - xi) * lo_v.entry->total;
        s.objective = xi * hi_v.entry->objective + (1.0 - xi) * lo_v.entry->objective;
        s.policies_evaluated = evaluated;
        out.push_back(std::move(s));
    }
    return out;
}

/// Exhaustive constrained optimum at the configured budget.
inline OracleSolution oracle_solve(const StateSpace& space, const ChannelModel& model,
                                   const SystemConfig& cfg, const OracleOptions& options = {}) {
    return oracle_solve_many(space, model, cfg, {cfg.power_budget}, options).front();
}

} // namespace aoisched
