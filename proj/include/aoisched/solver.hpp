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
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "aoisched/chain.hpp"
#include "aoisched/cmdp.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/policy.hpp"

namespace aoisched {

namespace detail {

/// Lower envelope of the per-level lines value_k(b) = coef_k + eps_k * b.
/// Levels arrive with strictly increasing slope (failure probability), so a
/// monotone-chain pass keeps exactly the lines that are minimal somewhere.
/// Queries return the minimizing level; exact ties resolve to the higher
/// level, i.e. the lower transmit power.
class LevelEnvelope {
public:
    void build(const std::vector<double>& eps, const std::vector<double>& coef) {
        slope_.clear();
        icept_.clear();
        level_.clear();
        const int n = static_cast<int>(eps.size());
        for (int k = 0; k < n; ++k) {
            const double s = eps[static_cast<size_t>(k)];
            const double i = coef[static_cast<size_t>(k)];
            while (slope_.size() >= 2 && unnecessary(slope_.size() - 1, s, i)) {
                slope_.pop_back();
                icept_.pop_back();
                level_.pop_back();
            }
            slope_.push_back(s);
            icept_.push_back(i);
            level_.push_back(k + 1);
        }
    }

    /// Minimum over levels of coef_k + eps_k * b; sets `level` to the 1-based
    /// minimizer.
    double query(double b, int& level) const {
        size_t lo = 0, hi = slope_.size() - 1;
        while (lo < hi) {
            const size_t mid = (lo + hi) / 2;
            if (icept_[mid] + slope_[mid] * b < icept_[mid + 1] + slope_[mid + 1] * b)
                hi = mid;
            else
                lo = mid + 1;
        }
        level = level_[lo];
        return icept_[lo] + slope_[lo] * b;
    }

    double query(double b) const {
        int ignored;
        return query(b, ignored);
    }

private:
    // Whether the current last line (index `last`) can never be strictly
    // below both its predecessor and the incoming line (slope s, intercept i).
    bool unnecessary(size_t last, double s, double i) const {
        const double sa = slope_[last - 1], ia = icept_[last - 1];
        const double sb = slope_[last], ib = icept_[last];
        return (ib - ia) * (s - sa) >= (sb - sa) * (i - ia);
    }

    std::vector<double> slope_, icept_;
    std::vector<int> level_;
};

/// Precomputed geometry of the Bellman operator for one problem instance:
/// successor indices never change, and per-multiplier data is refreshed by
/// set_eta.
struct BellmanContext {
    const StateSpace* space = nullptr;
    const ChannelModel* model = nullptr;
    const SystemConfig* cfg = nullptr;

    std::vector<int> fail_r, succ_r, fail_g;
    int succ_g = 0;  // every generate success lands in (1,1)
    std::vector<double> base_r, base_g;  // (1-gamma)-scaled state rewards
    std::vector<double> shift_r;         // extra slope term for final-round retransmits
    std::vector<double> eps;
    std::vector<double> coef;  // per-level (1-gamma)(weight+eta) * power
    LevelEnvelope env;
    double gamma = 0.0;
    double eta = 0.0;

    BellmanContext(const StateSpace& sp, const ChannelModel& m, const SystemConfig& c) {
        space = &sp;
        model = &m;
        cfg = &c;
        c.validate();
        if (m.levels < 1) throw std::invalid_argument("solver: channel has no levels");
        if (m.rate != c.rate)
            throw std::invalid_argument("solver: channel rate differs from configured rate");
        gamma = c.discount;
        const int n = sp.size();
        fail_r.resize(static_cast<size_t>(n));
        succ_r.resize(static_cast<size_t>(n));
        fail_g.resize(static_cast<size_t>(n));
        base_r.resize(static_cast<size_t>(n));
        base_g.resize(static_cast<size_t>(n));
        shift_r.assign(static_cast<size_t>(n), 0.0);
        succ_g = sp.index(1, 1);
        const double scale = 1.0 - gamma;
        for (int i = 0; i < n; ++i) {
            const State& s = sp.state(i);
            fail_r[static_cast<size_t>(i)] =
                sp.index(next_state_on_failure(s, ActionKind::retransmit, c));
            succ_r[static_cast<size_t>(i)] =
                sp.index(next_state_on_success(s, ActionKind::retransmit));
            fail_g[static_cast<size_t>(i)] =
                sp.index(next_state_on_failure(s, ActionKind::generate, c));
            base_r[static_cast<size_t>(i)] = scale * (s.age + 0.5);
            base_g[static_cast<size_t>(i)] =
                scale * (s.age + 0.5 + c.power_weight * c.sensing_power());
            if (c.charge_sensing_on_discard && s.round == c.max_rounds)
                shift_r[static_cast<size_t>(i)] = scale * c.power_weight * c.sensing_power();
        }
        eps = m.failure_probs;
        coef.resize(eps.size());
        set_eta(0.0);
    }

    void set_eta(double e) {
        eta = e;
        const double a = (1.0 - gamma) * (cfg->power_weight + e);
        for (size_t k = 0; k < coef.size(); ++k) coef[k] = a * model->powers[k];
        env.build(eps, coef);
    }

    /// One Jacobi sweep computing only values; returns the sup-norm residual.
    double sweep(const std::vector<double>& v, std::vector<double>& out) const {
        const int n = space->size();
        const double g = gamma;
        const double v_fresh = v[static_cast<size_t>(succ_g)];
        double residual = 0.0;
        for (int i = 0; i < n; ++i) {
            const double vs_r = v[static_cast<size_t>(succ_r[static_cast<size_t>(i)])];
            const double b_r =
                g * (v[static_cast<size_t>(fail_r[static_cast<size_t>(i)])] - vs_r) +
                shift_r[static_cast<size_t>(i)];
            const double cand_r = base_r[static_cast<size_t>(i)] + g * vs_r + env.query(b_r);
            const double b_g =
                g * (v[static_cast<size_t>(fail_g[static_cast<size_t>(i)])] - v_fresh);
            const double cand_g = base_g[static_cast<size_t>(i)] + g * v_fresh + env.query(b_g);
            const double nv = cand_r < cand_g ? cand_r : cand_g;
            residual = std::max(residual, std::abs(nv - v[static_cast<size_t>(i)]));
            out[static_cast<size_t>(i)] = nv;
        }
        return residual;
    }

    /// Full-scan update over every (kind, level) pair, with the documented
    /// tie-breaking; the reference semantics the fast sweep must match.
    void scan(const std::vector<double>& v, std::vector<double>& out, Policy* greedy) const {
        const int n = space->size();
        const int levels = model->levels;
        const double g = gamma;
        const double v_fresh = v[static_cast<size_t>(succ_g)];
        if (greedy) greedy->actions.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            double best_val = 0.0, best_power = 0.0;
            Action best{};
            bool first = true;
            for (int kind_ix = 0; kind_ix < 2; ++kind_ix) {
                const ActionKind kind =
                    kind_ix == 0 ? ActionKind::retransmit : ActionKind::generate;
                const bool retrans = kind == ActionKind::retransmit;
                const double vs = retrans
                                      ? v[static_cast<size_t>(succ_r[static_cast<size_t>(i)])]
                                      : v_fresh;
                const double vf = retrans
                                      ? v[static_cast<size_t>(fail_r[static_cast<size_t>(i)])]
                                      : v[static_cast<size_t>(fail_g[static_cast<size_t>(i)])];
                const double b = g * (vf - vs) + (retrans ? shift_r[static_cast<size_t>(i)] : 0.0);
                const double pre =
                    (retrans ? base_r[static_cast<size_t>(i)] : base_g[static_cast<size_t>(i)]) +
                    g * vs;
                for (int k = 1; k <= levels; ++k) {
                    const double val =
                        pre + (coef[static_cast<size_t>(k) - 1] +
                               eps[static_cast<size_t>(k) - 1] * b);
                    const double power =
                        model->powers[static_cast<size_t>(k) - 1] +
                        (retrans ? 0.0 : cfg->sensing_power());
                    const bool take =
                        first || val < best_val ||
                        (val == best_val &&
                         (power < best_power ||
                          (power == best_power &&
                           ((retrans && best.kind == ActionKind::generate) ||
                            (kind == best.kind && k < best.level)))));
                    if (take) {
                        best_val = val;
                        best_power = power;
                        best = Action{kind, k};
                        first = false;
                    }
                }
            }
            out[static_cast<size_t>(i)] = best_val;
            if (greedy) greedy->actions[static_cast<size_t>(i)] = best;
        }
    }
};

} // namespace detail

/// One exact Bellman update of the (1-gamma)-normalized optimality operator,
/// returning the updated values and the greedy policy.  Ties between actions
/// prefer the lower total power, then retransmit over generate, then the
/// lower level index.
struct BellmanResult {
    std::vector<double> value;
    Policy greedy;
};

inline BellmanResult bellman_update(const std::vector<double>& v, const StateSpace& space,
                                    const ChannelModel& model, const SystemConfig& cfg,
                                    double eta) {
    if (static_cast<int>(v.size()) != space.size())
        throw std::invalid_argument("bellman_update: value size does not match state space");
    detail::BellmanContext ctx(space, model, cfg);
    ctx.set_eta(eta);
    BellmanResult r;
    r.value.resize(v.size());
    ctx.scan(v, r.value, &r.greedy);
    return r;
}

struct ValueIterationResult {
    std::vector<double> value;
    Policy greedy;
    long iterations = 0;
    double residual = 0.0;
};

/// Iterate the normalized Bellman operator to the configured sup-norm
/// tolerance, then extract the greedy policy with one reference scan.
/// Throws SolverError when the sweep cap is exhausted or values blow up.
inline ValueIterationResult value_iteration(const StateSpace& space, const ChannelModel& model,
                                            const SystemConfig& cfg, double eta,
                                            const std::vector<double>* warm_start = nullptr) {
    detail::BellmanContext ctx(space, model, cfg);
    ctx.set_eta(eta);

    std::vector<double> v(static_cast<size_t>(space.size()), 0.0);
    if (warm_start) {
        if (warm_start->size() != v.size())
            throw std::invalid_argument("value_iteration: warm start has wrong size");
        v = *warm_start;
    }
    std::vector<double> next(v.size(), 0.0);

    ValueIterationResult out;
    bool converged = false;
    for (long it = 0; it < cfg.max_iterations; ++it) {
        const double residual = ctx.sweep(v, next);
        v.swap(next);
        ++out.iterations;
        if (!std::isfinite(residual))
            throw SolverError("value_iteration: values diverged (eta=" + std::to_string(eta) +
                              ")");
        out.residual = residual;
        if (residual <= cfg.value_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw SolverError("value_iteration: no convergence within " +
                          std::to_string(cfg.max_iterations) + " sweeps (eta=" +
                          std::to_string(eta) + ", residual=" + std::to_string(out.residual) +
                          ")");
    out.value.resize(v.size());
    ctx.scan(v, out.value, &out.greedy);
    ++out.iterations;
    return out;
}

/// Weight on the lower-multiplier policy that makes the two-policy mixture
/// meet the transmit budget exactly.  Degenerate brackets return 1.
inline double mixture_coefficient(double c_minus, double c_plus, double c_target) {
    const double tol = 1e-9 * std::max({1.0, std::abs(c_minus), std::abs(c_plus)});
    if (c_target > c_minus + tol || c_target < c_plus - tol)
        throw std::invalid_argument("mixture_coefficient: target outside [c_plus, c_minus]");
    if (!(c_minus > c_plus)) return 1.0;
    const double xi = (c_target - c_plus) / (c_minus - c_plus);
    return std::clamp(xi, 0.0, 1.0);
}

struct EtaPoint {
    std::string phase;  // "init", "bracket", or "bisect"
    double eta = 0.0;
    double avg_transmit_power = 0.0;
    long vi_iterations = 0;
    double residual = 0.0;
};

/// Constrained solution: two deterministic policies bracketing the budget and
/// the mixing weight xi on the lower-multiplier one.  When the budget is not
/// binding both policies coincide with the unconstrained minimizer and xi=1.
struct LagrangianSolution {
    double eta_minus = 0.0;
    double eta_plus = 0.0;
    double xi = 1.0;
    bool constraint_active = false;
    Policy policy_minus, policy_plus;
    PolicyTable table_minus, table_plus;
    std::vector<double> pi_minus, pi_plus;
    Metrics metrics_minus, metrics_plus, mixed;
    std::vector<EtaPoint> trace;

    /// Scalar objective the solver minimizes, evaluated on the mixture.
    double objective(const SystemConfig& cfg) const {
        return mixed.avg_age + cfg.power_weight * mixed.avg_total_power;
    }
};

namespace detail {

struct EtaEvaluation {
    double eta = 0.0;
    Policy policy;
    PolicyTable table;
    std::vector<double> pi;
    Metrics metrics;
};

} // namespace detail

/// Minimize average age plus weighted average total power subject to the
/// average transmit-power budget: value iteration inside, bisection on the
/// budget multiplier outside, and an affine mixture of the two bracketing
/// policies to meet the budget exactly.  An optional sink receives the
/// multiplier trajectory as CSV.
inline LagrangianSolution solve_cmdp(const StateSpace& space, const ChannelModel& model,
                                     const SystemConfig& cfg,
                                     std::ostream* trace_csv = nullptr) {
    cfg.validate();
    LagrangianSolution sol;
    std::vector<double> warm(static_cast<size_t>(space.size()), 0.0);
    std::vector<std::pair<double, double>> audit;  // (eta, avg transmit power)

    if (trace_csv)
        *trace_csv << "phase,eta,vi_iterations,residual,avg_transmit_power\n";

    auto evaluate = [&](double eta, const char* phase) {
        ValueIterationResult vi = value_iteration(space, model, cfg, eta, &warm);
        warm = vi.value;
        detail::EtaEvaluation ev;
        ev.eta = eta;
        ev.policy = std::move(vi.greedy);
        ev.table = resolve_policy(ev.policy, space, model, cfg);
        ev.pi = steady_state(induced_chain(ev.table, space, cfg));
        ev.metrics = average_metrics(ev.pi, ev.table, space, cfg);
        audit.emplace_back(eta, ev.metrics.avg_transmit_power);
        sol.trace.push_back(EtaPoint{phase, eta, ev.metrics.avg_transmit_power, vi.iterations,
                                     vi.residual});
        if (trace_csv) {
            char line[160];
            std::snprintf(line, sizeof line, "%s,%.12g,%ld,%.3e,%.12g\n", phase, eta,
                          vi.iterations, vi.residual, ev.metrics.avg_transmit_power);
            *trace_csv << line;
        }
        return ev;
    };

    auto finish = [&](const detail::EtaEvaluation& lo, const detail::EtaEvaluation& hi,
                      double xi, bool active) {
        sol.eta_minus = lo.eta;
        sol.eta_plus = hi.eta;
        sol.xi = xi;
        sol.constraint_active = active;
        sol.policy_minus = lo.policy;
        sol.policy_plus = hi.policy;
        sol.table_minus = lo.table;
        sol.table_plus = hi.table;
        sol.pi_minus = lo.pi;
        sol.pi_plus = hi.pi;
        sol.metrics_minus = lo.metrics;
        sol.metrics_plus = hi.metrics;
        sol.mixed = mix_metrics(lo.metrics, hi.metrics, xi);
    };

    auto check_monotone = [&]() {
        std::vector<std::pair<double, double>> pts = audit;
        std::sort(pts.begin(), pts.end());
        for (size_t i = 1; i < pts.size(); ++i) {
            const double prev = pts[i - 1].second, cur = pts[i].second;
            if (cur > prev + 1e-8 * (1.0 + std::abs(prev)))
                throw SolverError("solve_cmdp: average transmit power rose from " +
                                  std::to_string(prev) + " to " + std::to_string(cur) +
                                  " as the multiplier grew; the bisection premise failed");
        }
    };

    detail::EtaEvaluation lo = evaluate(0.0, "init");
    if (lo.metrics.avg_transmit_power <= cfg.power_budget) {
        finish(lo, lo, 1.0, false);
        return sol;
    }

    double eta_hi = 1.0;
    detail::EtaEvaluation hi;
    bool bracketed = false;
    for (int step = 0; step < 60; ++step) {
        detail::EtaEvaluation ev = evaluate(eta_hi, "bracket");
        if (ev.metrics.avg_transmit_power > cfg.power_budget) {
            lo = std::move(ev);  // still infeasible: a tighter lower bracket
            eta_hi *= 2.0;
        } else {
            hi = std::move(ev);
            bracketed = true;
            break;
        }
    }
    if (!bracketed)
        throw SolverError("solve_cmdp: could not bracket the budget multiplier");

    double eta_lo_val = lo.eta;
    while (hi.eta - eta_lo_val > cfg.eta_tol) {
        const double mid = 0.5 * (eta_lo_val + hi.eta);
        detail::EtaEvaluation ev = evaluate(mid, "bisect");
        if (ev.metrics.avg_transmit_power > cfg.power_budget) {
            lo = std::move(ev);
            eta_lo_val = mid;
        } else {
            hi = std::move(ev);
        }
    }

    check_monotone();
    const double xi = mixture_coefficient(lo.metrics.avg_transmit_power,
                                          hi.metrics.avg_transmit_power, cfg.power_budget);
    finish(lo, hi, xi, true);
    return sol;
}

} // namespace aoisched
