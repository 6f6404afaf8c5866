#pragma once

#include "waverate/green.hpp"
#include "waverate/parallel.hpp"
#include "waverate/rng.hpp"
#include "waverate/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace waverate {

// Noise layout of the driven node system: one Gaussian increment per time
// step and spatial cell, variance dt/n, representing the sheet increment over
// the cell. Increments are drawn from a counter-based stream keyed by
// (seed, sample, step), so they are independent across cells and steps and
// identical for serial and parallel runs.
struct NoisePlan {
    std::uint64_t seed = 0;
    int n = 2;
    int m_mc = 1;
    double T = 1.0;
    std::uint64_t sample_index = 0;
    bool zero_increments = false; // forces the noiseless path

    double dt() const { return T / m_mc; }
};

// One path of the driven system, returning the terminal value at x0 through
// the polygonal interpolation. The deterministic flow is the same
// half-kick / half-rotation composition as the skeleton solver; the noise is
// a full-step Euler-Maruyama kick n sqrt(eps) sigma(u) dW placed between the
// two half rotations, which keeps the propagated noise variance accurate to
// O(dt^2) (midpoint weighting) without breaking the symmetric deterministic
// flow. With zero increments the path is bit-identical to upsilon_n(0).
inline double simulate_terminal(const ProblemSpec& spec, int n, int m_mc, double eps,
                                const NoisePlan& plan) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("simulate_terminal: eps outside [0,1]");
    SpaceTimeGrid grid(n, m_mc, spec.T);
    double dt = grid.dt();
    if (dt > grid.stability_fraction / (2.0 * n) + 1e-15)
        throw DomainError("simulate_terminal: dt exceeds stability_fraction/(2n)");
    int d = n - 1;
    std::vector<double> q(d), p(d);
    for (int k = 1; k < n; ++k) {
        q[k - 1] = spec.u0.eval(grid.node(k));
        p[k - 1] = spec.v0.eval(grid.node(k));
    }
    double scale = 1.0;
    for (double v : q) scale = std::max(scale, std::fabs(v));
    StrangStepper stepper(spec, n, dt);
    double kick_scale = n * std::sqrt(eps);
    double sd = std::sqrt(dt / n);
    Rng rng(plan.seed, 0x6d63 * (plan.sample_index + 1));
    for (int i = 0; i < m_mc; ++i) {
        stepper.step(q, p, nullptr, [&](std::vector<double>& qq, std::vector<double>& pp) {
            if (plan.zero_increments) return;
            for (int k = 0; k < d; ++k) {
                double dw = sd * rng.normal();
                pp[k] += kick_scale * spec.sigma.eval(qq[k]) * dw;
            }
        });
        detail::check_blowup(q, scale);
    }
    // terminal polygonal value at x0
    int k = kappa_index(n, spec.x0);
    double frac = spec.x0 * n - k;
    if (frac < 0.0) frac = 0.0;
    if (frac > 1.0) frac = 1.0;
    double a = (k >= 1 && k <= d) ? q[k - 1] : 0.0;
    double b = (k + 1 >= 1 && k + 1 <= d) ? q[k] : 0.0;
    return a + frac * (b - a);
}

struct RareEvent {
    double y = 0.0;
    bool upper = true; // {u >= y} if true, {u <= y} otherwise
};

struct RareEventEstimate {
    double eps = 0.0;
    long samples = 0;
    long hits = 0;
    double phat = 0.0;
    double lo = 0.0; // Wilson 95% interval
    double hi = 0.0;
    bool zero_hits = false;

    // -eps log phat; +inf on zero hits, where only -eps log hi is a valid
    // lower bound on the decay rate
    double eps_log() const {
        return phat > 0.0 ? -eps * std::log(phat) : std::numeric_limits<double>::infinity();
    }
    double eps_log_lower_bound() const { return hi > 0.0 ? -eps * std::log(hi) : 0.0; }
};

inline void wilson_interval(long hits, long samples, double& lo, double& hi) {
    const double z = 1.959963984540054;
    double nn = static_cast<double>(samples);
    double ph = static_cast<double>(hits) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (ph + z2 / (2.0 * nn)) / denom;
    double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
    lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
    hi = hits == samples ? 1.0 : std::min(1.0, center + half);
}

// Crude Monte Carlo with independent per-sample streams. The hit count is an
// order-independent integer sum, so the estimate does not depend on the
// worker count.
inline RareEventEstimate estimate_rare(const ProblemSpec& spec, int n, int m_mc, double eps,
                                       const RareEvent& event, long samples, std::uint64_t seed,
                                       int threads = 1) {
    if (samples < 1000) throw DomainError("estimate_rare: need at least 1000 samples");
    std::vector<unsigned char> hit(static_cast<std::size_t>(samples), 0);
    parallel_for(static_cast<int>(samples), threads, [&](int s) {
        NoisePlan plan{seed, n, m_mc, spec.T, static_cast<std::uint64_t>(s), false};
        double u = simulate_terminal(spec, n, m_mc, eps, plan);
        bool in = event.upper ? (u >= event.y) : (u <= event.y);
        hit[static_cast<std::size_t>(s)] = in ? 1 : 0;
    });
    long hits = 0;
    for (unsigned char c : hit) hits += c;
    RareEventEstimate est;
    est.eps = eps;
    est.samples = samples;
    est.hits = hits;
    est.phat = static_cast<double>(hits) / static_cast<double>(samples);
    est.zero_hits = hits == 0;
    wilson_interval(hits, samples, est.lo, est.hi);
    return est;
}

struct SlopeRow {
    RareEventEstimate estimate;
    double gaussian_oracle_p = -1.0; // filled for the linear class
};

struct SlopeReport {
    std::vector<SlopeRow> rows;
    double rate_value = 0.0; // I^n(y) to compare the slope against
};

inline double normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Table of (eps, phat, -eps log phat) against the rate value; for the linear
// class each row also carries the exact Gaussian tail probability from the
// mode-sum mean and variance.
inline SlopeReport ldp_slope(const ProblemSpec& spec, int n, int m_mc, double y,
                             const std::vector<double>& eps_list, long samples,
                             std::uint64_t seed, double rate_value, int threads = 1) {
    if (eps_list.size() < 1) throw DomainError("ldp_slope: empty eps list");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw DomainError("ldp_slope: eps list must decrease");
    SlopeReport rep;
    rep.rate_value = rate_value;
    bool linear_class = true;
    for (int i = 0; i <= 16 && linear_class; ++i) {
        double u = -2.0 + 4.0 * i / 16.0;
        if (std::fabs(spec.b.eval(u)) > 1e-13 ||
            std::fabs(spec.sigma.eval(u) - spec.sigma.eval(0.0)) > 1e-13)
            linear_class = false;
    }
    double mun = 0.0, Vn = 0.0;
    if (linear_class) {
        DiscreteGreen dg(n);
        mun = dg.initial_terms(spec, spec.T, spec.x0);
        double sig = spec.sigma.eval(0.0);
        Vn = sig * sig * dg.squared_kernel_integral(spec.T, spec.x0);
    }
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        SlopeRow row;
        double eps = eps_list[i];
        row.estimate = estimate_rare(spec, n, m_mc, eps, RareEvent{y, y >= mun}, samples,
                                     seed + i, threads);
        if (linear_class) {
            double z = std::fabs(y - mun) / std::sqrt(eps * Vn);
            row.gaussian_oracle_p = normal_tail(z);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

// Kolmogorov-Smirnov distance against a reference CDF and the asymptotic
// acceptance threshold.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    double nn = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i + 1) / nn));
        d = std::max(d, std::fabs(f - static_cast<double>(i) / nn));
    }
    return d;
}

inline double ks_critical(double alpha, std::size_t m) {
    double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    double sm = std::sqrt(static_cast<double>(m));
    return c / (sm + 0.12 + 0.11 / sm);
}

inline double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

} // namespace waverate
