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
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoisched/errors.hpp"

namespace aoisched {

/// Continuous distribution of the per-slot channel power gain.
///
/// cdf(z) must be a proper CDF on [0, inf); quantile(p) its inverse
/// (the smallest z with cdf(z) >= p).  quantile(1) may be +inf for
/// distributions with unbounded support.
struct FadingDistribution {
    std::string name;
    std::function<double(double)> cdf;
    std::function<double(double)> quantile;
};

/// Rayleigh-faded link with unit mean power gain: the power gain is
/// exponentially distributed with mean 1.
inline FadingDistribution rayleigh_unit_mean() {
    FadingDistribution d;
    d.name = "rayleigh_unit_mean";
    d.cdf = [](double z) { return z <= 0.0 ? 0.0 : -std::expm1(-z); };
    d.quantile = [](double p) {
        if (p < 0.0 || p > 1.0)
            throw std::domain_error("quantile argument outside [0,1]");
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-p);
    };
    return d;
}

/// Transmit power required to close a fixed-rate slot when the power gain is
/// exactly at `gain`: (2^rate - 1) / gain, with the convention that an
/// infinite gain threshold needs zero power (staying silent).
inline double required_power(double gain, double rate) {
    if (std::isinf(gain)) return 0.0;
    return (std::exp2(rate) - 1.0) / gain;
}

/// Smallest power gain under which a transmission at `power` still succeeds.
/// Zero power never succeeds (infinite threshold).
inline double gain_threshold_for_power(double power, double rate) {
    if (power <= 0.0) return std::numeric_limits<double>::infinity();
    return (std::exp2(rate) - 1.0) / power;
}

inline double dbw_to_watt(double dbw) { return std::pow(10.0, dbw / 10.0); }

inline double watt_to_dbw(double watt) {
    if (watt <= 0.0)
        throw std::domain_error("watt_to_dbw: power must be positive");
    return 10.0 * std::log10(watt);
}

/// Discretized channel: the gain axis is cut into `levels` bins by the
/// thresholds, and each level k transmits with exactly the power that closes
/// the slot whenever the gain falls at or above thresholds[k].
///
/// Invariants:
///  - thresholds has levels+1 entries, strictly increasing, thresholds[0] = 0;
///  - bin_probs sum to 1;
///  - powers is strictly decreasing with level; the last level is silent
///    (zero power) exactly when the final threshold is infinite;
///  - failure_probs is strictly increasing with level and ends at 1.
struct ChannelModel {
    int levels = 0;                     // number of power levels K
    double rate = 1.0;                  // spectral efficiency R of a slot
    std::vector<double> thresholds;     // z_0 .. z_K
    std::vector<double> bin_probs;      // beta_1 .. beta_K
    std::vector<double> powers;         // P_1 .. P_K
    std::vector<double> failure_probs;  // eps_1 .. eps_K

    /// Transmit power of 1-based level k.
    double power(int level) const { return powers.at(checked(level)); }
    /// Probability that a slot sent at 1-based level k fails.
    double failure(int level) const { return failure_probs.at(checked(level)); }
    /// Lower gain edge of the success region of 1-based level k.
    double threshold(int level) const { return thresholds.at(static_cast<size_t>(checked(level)) + 1); }

private:
    size_t checked(int level) const {
        if (level < 1 || level > levels)
            throw std::out_of_range("channel level out of range: " + std::to_string(level));
        return static_cast<size_t>(level - 1);
    }
};

namespace detail {

inline ChannelModel finish_channel(const FadingDistribution& dist,
                                   std::vector<double> thresholds, double rate) {
    const int levels = static_cast<int>(thresholds.size()) - 1;
    ChannelModel m;
    m.levels = levels;
    m.rate = rate;
    m.thresholds = std::move(thresholds);

    m.bin_probs.resize(levels);
    m.powers.resize(levels);
    m.failure_probs.resize(levels);
    double cum = 0.0;
    for (int k = 1; k <= levels; ++k) {
        const double lo = m.thresholds[static_cast<size_t>(k) - 1];
        const double hi = m.thresholds[static_cast<size_t>(k)];
        if (!(hi > lo))
            throw std::invalid_argument("channel thresholds must be strictly increasing");
        const double beta = dist.cdf(hi) - dist.cdf(lo);
        if (!(beta > 0.0))
            throw std::invalid_argument("channel bin " + std::to_string(k) +
                                        " has zero probability mass");
        m.bin_probs[static_cast<size_t>(k) - 1] = beta;
        m.powers[static_cast<size_t>(k) - 1] = required_power(hi, rate);
        cum += beta;  // running prefix: probability the gain falls below hi
        m.failure_probs[static_cast<size_t>(k) - 1] = cum;
    }
    if (std::abs(cum - 1.0) > 1e-9)
        throw std::invalid_argument("channel bin probabilities sum to " + std::to_string(cum) +
                                    ", expected 1");
    m.failure_probs.back() = 1.0;  // the top bin always reaches the full mass
    for (int k = 1; k < levels; ++k)
        if (!(m.powers[static_cast<size_t>(k) - 1] > m.powers[static_cast<size_t>(k)]))
            throw std::invalid_argument("channel powers must be strictly decreasing");
    return m;
}

} // namespace detail

/// Cut the gain axis into `levels` equiprobable bins and derive the per-level
/// transmit powers and failure probabilities.  The top bin is unbounded when
/// the distribution has unbounded support, making the top level silent.
inline ChannelModel quantize_channel(const FadingDistribution& dist, int levels, double rate) {
    if (levels < 1) throw std::invalid_argument("quantize_channel: levels must be >= 1");
    if (!(rate > 0.0)) throw std::invalid_argument("quantize_channel: rate must be > 0");

    std::vector<double> thresholds(static_cast<size_t>(levels) + 1);
    thresholds[0] = 0.0;
    for (int k = 1; k <= levels; ++k) {
        const double z = dist.quantile(static_cast<double>(k) / levels);
        if (k < levels && !std::isfinite(z))
            throw std::invalid_argument("fading distribution produced a non-finite quantile "
                                        "below probability 1");
        if (std::isnan(z))
            throw std::invalid_argument("fading distribution produced NaN quantile");
        thresholds[static_cast<size_t>(k)] = z;
    }
    ChannelModel m = detail::finish_channel(dist, std::move(thresholds), rate);
    // The quantile construction makes the bins equiprobable by definition;
    // differencing the cdf would reintroduce rounding error, so pin the exact
    // masses k/levels here.
    for (int k = 1; k <= levels; ++k) {
        m.bin_probs[static_cast<size_t>(k) - 1] = 1.0 / levels;
        m.failure_probs[static_cast<size_t>(k) - 1] = static_cast<double>(k) / levels;
    }
    return m;
}

/// Build a channel from caller-supplied gain thresholds (z_0 = 0 included),
/// recomputing bin masses from the distribution.  Thresholds must be strictly
/// increasing and the final one must capture the full remaining mass.
inline ChannelModel quantize_channel(const FadingDistribution& dist,
                                     const std::vector<double>& thresholds, double rate) {
    if (thresholds.size() < 2)
        throw std::invalid_argument("quantize_channel: need at least two thresholds");
    if (thresholds.front() != 0.0)
        throw std::invalid_argument("quantize_channel: first threshold must be 0");
    if (!(rate > 0.0)) throw std::invalid_argument("quantize_channel: rate must be > 0");
    return detail::finish_channel(dist, thresholds, rate);
}

} // namespace aoisched
