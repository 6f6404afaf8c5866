#pragma once

#include "waverate/control.hpp"
#include "waverate/green.hpp"
#include "waverate/path.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace waverate {

// Exact rotation of the linear semidiscrete wave flow over a fixed step,
// diagonalized in the discrete sine basis. Interior vectors only.
class WaveRotation {
public:
    WaveRotation(int n, double step) : n_(n) {
        int d = n - 1;
        basis_.assign(static_cast<std::size_t>(d) * d, 0.0);
        double r = 1.0 / std::sqrt(static_cast<double>(n));
        for (int k = 0; k < d; ++k)
            for (int j = 0; j < d; ++j)
                basis_[static_cast<std::size_t>(k) * d + j] =
                    r * sine_node(j + 1, k + 1, n);
        cosw_.resize(d);
        sinw_over_w_.resize(d);
        w_sinw_.resize(d);
        for (int j = 0; j < d; ++j) {
            double w = mode_frequency(n, j + 1);
            cosw_[j] = std::cos(w * step);
            sinw_over_w_[j] = std::sin(w * step) / w;
            w_sinw_[j] = w * std::sin(w * step);
        }
        tmpq_.resize(d);
        tmpp_.resize(d);
    }

    // (q,p) -> (cos q + sin/w p, -w sin q + cos p), applied in place
    void apply(std::vector<double>& q, std::vector<double>& p) const {
        to_modes(q, tmpq_);
        to_modes(p, tmpp_);
        int d = n_ - 1;
        for (int j = 0; j < d; ++j) {
            double qh = tmpq_[j], ph = tmpp_[j];
            tmpq_[j] = cosw_[j] * qh + sinw_over_w_[j] * ph;
            tmpp_[j] = -w_sinw_[j] * qh + cosw_[j] * ph;
        }
        from_modes(tmpq_, q);
        from_modes(tmpp_, p);
    }

    // transpose of apply, for the discrete adjoint
    void apply_transpose(std::vector<double>& gq, std::vector<double>& gp) const {
        to_modes(gq, tmpq_);
        to_modes(gp, tmpp_);
        int d = n_ - 1;
        for (int j = 0; j < d; ++j) {
            double a = tmpq_[j], b = tmpp_[j];
            tmpq_[j] = cosw_[j] * a - w_sinw_[j] * b;
            tmpp_[j] = sinw_over_w_[j] * a + cosw_[j] * b;
        }
        from_modes(tmpq_, gq);
        from_modes(tmpp_, gp);
    }

private:
    int n_;
    std::vector<double> basis_; // orthogonal, row k: node k+1
    std::vector<double> cosw_, sinw_over_w_, w_sinw_;
    mutable std::vector<double> tmpq_, tmpp_;

    void to_modes(const std::vector<double>& nodal, std::vector<double>& modes) const {
        int d = n_ - 1;
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k)
                s += basis_[static_cast<std::size_t>(k) * d + j] * nodal[k];
            modes[j] = s;
        }
    }
    void from_modes(const std::vector<double>& modes, std::vector<double>& nodal) const {
        int d = n_ - 1;
        for (int k = 0; k < d; ++k) {
            double s = 0.0;
            const double* row = &basis_[static_cast<std::size_t>(k) * d];
            for (int j = 0; j < d; ++j) s += row[j] * modes[j];
            nodal[k] = s;
        }
    }
};

namespace detail {

inline void check_blowup(const std::vector<double>& q, double scale) {
    for (double v : q)
        if (!(std::fabs(v) <= 1e8 * scale))
            throw DomainError("skeleton solver: instability detected (reduce dt)");
}

} // namespace detail

// Time integrator for the node system  f'' = Lap_n f + b(f) + sigma(f) h(t):
// symmetric splitting with the stiff linear part advanced by exact rotation
// and the nonlinear force applied as half-step kicks,
//   half kick | half rotation | (noise hook) | half rotation | half kick.
// The mid-step hook is shared with the Monte Carlo driver so that the
// noiseless stochastic path and the deterministic solve are bit-identical.
// Second order; exact for b = 0, h = 0.
class StrangStepper {
public:
    StrangStepper(const ProblemSpec& spec, int n, double dt)
        : spec_(&spec), n_(n), dt_(dt), half_rot_(n, dt / 2.0) {}

    template <typename MidHook>
    void step(std::vector<double>& q, std::vector<double>& p, const double* hrow,
              MidHook&& mid) const {
        kick(q, p, hrow);
        half_rot_.apply(q, p);
        mid(q, p);
        half_rot_.apply(q, p);
        kick(q, p, hrow);
    }

    void step(std::vector<double>& q, std::vector<double>& p, const double* hrow) const {
        step(q, p, hrow, [](std::vector<double>&, std::vector<double>&) {});
    }

    const WaveRotation& half_rotation() const { return half_rot_; }
    double dt() const { return dt_; }

    // force at the current position; hrow may be null (no control)
    void kick(const std::vector<double>& q, std::vector<double>& p, const double* hrow) const {
        int d = n_ - 1;
        for (int k = 0; k < d; ++k) {
            double u = q[k];
            double f = spec_->b.eval(u);
            if (hrow) f += spec_->sigma.eval(u) * hrow[k + 1];
            p[k] += 0.5 * dt_ * f;
        }
    }

private:
    const ProblemSpec* spec_;
    int n_;
    double dt_;
    WaveRotation half_rot_;
};

// Discrete skeleton solve on the control's own grid. Initial data are the
// nodal samples of u0, v0. dt must satisfy the stability bound.
inline DiscretePath upsilon_n(const ProblemSpec& spec, const Control& h) {
    SpaceTimeGrid grid(h.n, h.m, h.T); // validates the dt bound
    int n = h.n, m = h.m;
    double dt = grid.dt();
    DiscretePath path(n, m, h.T);
    std::vector<double> q(static_cast<std::size_t>(n) - 1), p(static_cast<std::size_t>(n) - 1);
    for (int k = 1; k < n; ++k) {
        q[k - 1] = spec.u0.eval(grid.node(k));
        p[k - 1] = spec.v0.eval(grid.node(k));
    }
    double scale = 1.0;
    for (double v : q) scale = std::max(scale, std::fabs(v));
    for (int k = 1; k < n; ++k) {
        path.pos(0, k) = q[k - 1];
        path.vel(0, k) = p[k - 1];
    }
    StrangStepper stepper(spec, n, dt);
    for (int i = 0; i < m; ++i) {
        stepper.step(q, p, &h.cells[static_cast<std::size_t>(i) * n]);
        detail::check_blowup(q, scale);
        for (int k = 1; k < n; ++k) {
            path.pos(i + 1, k) = q[k - 1];
            path.vel(i + 1, k) = p[k - 1];
        }
    }
    return path;
}

inline DiscretePath upsilon_n_zero(const ProblemSpec& spec, int n, int m) {
    return upsilon_n(spec, Control::zeros(n, m, spec.T));
}

// Picard iteration on the mild form, the independent oracle for upsilon_n.
// Space integrals are exact cell sums through the discrete kernel modes; the
// time convolution uses the composite trapezoid rule per time cell, honoring
// the one-sided limits of the cell-constant control at cell boundaries.
// Stops when the sup-grid update drops below picard_tol; growth across the
// iteration cap is reported as divergence.
inline DiscretePath upsilon_n_mild(const ProblemSpec& spec, const Control& h,
                                   double picard_tol = 1e-10, int max_iter = 200) {
    SpaceTimeGrid grid(h.n, h.m, h.T);
    int n = h.n, m = h.m;
    int d = n - 1;
    double dt = grid.dt();
    DiscreteGreen dg(n);

    std::vector<double> u0(d), v0hat(d), u0hat(d);
    for (int k = 1; k < n; ++k) u0[k - 1] = spec.u0.eval(grid.node(k));
    NodalVector u0n = NodalVector::sample(n, [&](double z) { return spec.u0.eval(z); });
    NodalVector v0n = NodalVector::sample(n, [&](double z) { return spec.v0.eval(z); });
    for (int j = 1; j < n; ++j) {
        u0hat[j - 1] = dg.mode_coefficient(j, u0n);
        v0hat[j - 1] = dg.mode_coefficient(j, v0n);
    }

    // f[i][k] on interior nodes; start from the homogeneous part
    std::vector<std::vector<double>> f(m + 1, std::vector<double>(d, 0.0));
    for (int i = 0; i <= m; ++i) {
        double t = grid.time(i);
        for (int k = 1; k < n; ++k) {
            double s = 0.0;
            for (int j = 1; j < n; ++j) {
                double w = dg.omega(j);
                s += (std::sin(w * t) / w * v0hat[j - 1] + std::cos(w * t) * u0hat[j - 1]) *
                     sine_basis(j, grid.node(k));
            }
            f[i][k - 1] = s;
        }
    }

    std::vector<std::vector<double>> nf_left(m + 1, std::vector<double>(d)),
        nf_right(m + 1, std::vector<double>(d));
    std::vector<std::vector<double>> conv(m + 1, std::vector<double>(d, 0.0));
    std::vector<std::vector<double>> dconv(m + 1, std::vector<double>(d, 0.0));
    std::vector<double> fnew(d);

    double prev_update = std::numeric_limits<double>::infinity();
    int grew = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        // forcing mode coefficients; left/right one-sided values at grid times
        for (int i = 0; i <= m; ++i) {
            int cell_l = std::max(0, i - 1);
            int cell_r = std::min(m - 1, i);
            for (int j = 1; j < n; ++j) {
                double sl = 0.0, sr = 0.0;
                for (int k = 1; k < n; ++k) {
                    double u = f[i][k - 1];
                    double bb = spec.b.eval(u);
                    double ss = spec.sigma.eval(u);
                    double ph = sine_basis(j, grid.node(k));
                    sl += ph * (bb + ss * h.at(cell_l, k));
                    sr += ph * (bb + ss * h.at(cell_r, k));
                }
                nf_left[i][j - 1] = sl / n;
                nf_right[i][j - 1] = sr / n;
            }
        }
        // per-mode Volterra convolution, trapezoid per cell
        for (int j = 1; j < n; ++j) {
            double w = dg.omega(j);
            for (int i = 0; i <= m; ++i) {
                double acc = 0.0, dacc = 0.0;
                double t = grid.time(i);
                for (int c = 0; c < i; ++c) {
                    double ta = t - grid.time(c);
                    double tb = t - grid.time(c + 1);
                    double ga = std::sin(w * ta) / w, gb = std::sin(w * tb) / w;
                    double da = std::cos(w * ta), db = std::cos(w * tb);
                    acc += 0.5 * dt * (ga * nf_right[c][j - 1] + gb * nf_left[c + 1][j - 1]);
                    dacc += 0.5 * dt * (da * nf_right[c][j - 1] + db * nf_left[c + 1][j - 1]);
                }
                conv[i][j - 1] = acc;
                dconv[i][j - 1] = dacc;
            }
        }
        // map modes back to nodes and measure the update
        double update = 0.0;
        for (int i = 0; i <= m; ++i) {
            double t = grid.time(i);
            for (int k = 1; k < n; ++k) {
                double s = 0.0;
                for (int j = 1; j < n; ++j) {
                    double w = dg.omega(j);
                    s += (std::sin(w * t) / w * v0hat[j - 1] + std::cos(w * t) * u0hat[j - 1] +
                          conv[i][j - 1]) *
                         sine_basis(j, grid.node(k));
                }
                fnew[k - 1] = s;
            }
            for (int k = 0; k < d; ++k) {
                update = std::max(update, std::fabs(fnew[k] - f[i][k]));
                f[i][k] = fnew[k];
            }
        }
        if (update < picard_tol) break;
        if (update > prev_update) {
            if (++grew > 8 || !std::isfinite(update))
                throw DomainError("upsilon_n_mild: Picard iteration diverges");
        }
        prev_update = update;
        if (iter == max_iter - 1 && update > 1e3 * picard_tol)
            throw DomainError("upsilon_n_mild: Picard iteration did not contract");
    }

    DiscretePath path(n, m, h.T);
    for (int i = 0; i <= m; ++i) {
        double t = grid.time(i);
        for (int k = 1; k < n; ++k) {
            path.pos(i, k) = f[i][k - 1];
            double s = 0.0;
            for (int j = 1; j < n; ++j) {
                double w = dg.omega(j);
                s += (std::cos(w * t) * v0hat[j - 1] - w * std::sin(w * t) * u0hat[j - 1] +
                      dconv[i][j - 1]) *
                     sine_basis(j, grid.node(k));
            }
            path.vel(i, k) = s;
        }
    }
    return path;
}

// Fine-resolution stand-in for the continuum solution map: embed the control
// exactly and solve on the n_ref grid.
inline DiscretePath upsilon_reference(const ProblemSpec& spec, const Control& h, int n_ref,
                                      int m_ref = 0) {
    if (n_ref < 4 * h.n)
        throw DomainError("upsilon_reference: n_ref must be at least 4x the control grid");
    if (n_ref % h.n != 0)
        throw DomainError("upsilon_reference: n_ref must be a multiple of the control grid");
    if (m_ref == 0) {
        int mult = (SpaceTimeGrid::default_steps(n_ref, h.T) + h.m - 1) / h.m;
        m_ref = h.m * mult;
    }
    return upsilon_n(spec, h.refined(n_ref, m_ref));
}

struct ErrorCurve {
    std::vector<int> ns;
    std::vector<double> errors;
    double fitted_order = 0.0; // least-squares slope of -log err vs log n
    bool all_zero = false;
};

inline double fit_log_order(const std::vector<int>& ns, const std::vector<double>& errs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (errs[i] <= 0.0) continue;
        double lx = std::log(static_cast<double>(ns[i]));
        double ly = std::log(errs[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    if (cnt < 2) return 0.0;
    double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return -slope;
}

struct SuiteReport {
    std::vector<int> ns;
    std::vector<double> maxima; // per-n maximum of the sampled quantity
    double overall = 0.0;

    // all maxima finite and within a factor band of each other
    bool stable(double band = 2.0) const {
        double lo = maxima.empty() ? 0.0 : maxima.front();
        double hi = lo;
        for (double v : maxima) {
            if (!std::isfinite(v)) return false;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi <= band * lo;
    }
};

// sup-norm of solutions over sampled controls in the radius-a ball, per
// resolution. Controls are drawn once on the base grid and embedded exactly,
// so every resolution sees the same L2 elements.
inline SuiteReport uniform_boundedness_suite(const ProblemSpec& spec,
                                             const std::vector<int>& ns,
                                             const std::vector<double>& radii, int per_radius,
                                             std::uint64_t seed) {
    SuiteReport rep;
    rep.ns = ns;
    int n0 = ns.front();
    int m0 = SpaceTimeGrid::default_steps(n0, spec.T);
    for (int n : ns) {
        int mult = n / n0;
        double worst = 0.0;
        for (double a : radii) {
            BallSampler sampler(a, seed);
            for (int idx = 0; idx < per_radius; ++idx) {
                Control h = sampler.sample(n0, m0, spec.T, idx).refined(n, m0 * mult);
                worst = std::max(worst, upsilon_n(spec, h).sup_norm());
            }
        }
        rep.maxima.push_back(worst);
        rep.overall = std::max(rep.overall, worst);
    }
    return rep;
}

// sampled Holder-1/2 increment ratios of solutions, per resolution
inline SuiteReport holder_suite(const ProblemSpec& spec, const std::vector<int>& ns, double a,
                                int controls, int pairs, std::uint64_t seed) {
    SuiteReport rep;
    rep.ns = ns;
    int n0 = ns.front();
    int m0 = SpaceTimeGrid::default_steps(n0, spec.T);
    BallSampler sampler(a, seed);
    for (int n : ns) {
        int mult = n / n0;
        double worst = 0.0;
        for (int idx = 0; idx < controls; ++idx) {
            Control h = sampler.sample(n0, m0, spec.T, idx).refined(n, m0 * mult);
            worst = std::max(worst, upsilon_n(spec, h).holder_seminorm(pairs, seed + idx));
        }
        rep.maxima.push_back(worst);
        rep.overall = std::max(rep.overall, worst);
    }
    return rep;
}

// sup-norm sensitivity to the control, per resolution:
// max over pairs of |Y(h1) - Y(h2)|_C / |h1 - h2|_L2
inline SuiteReport lipschitz_in_control_suite(const ProblemSpec& spec,
                                              const std::vector<int>& ns, double a, int pairs,
                                              std::uint64_t seed) {
    SuiteReport rep;
    rep.ns = ns;
    int n0 = ns.front();
    int m0 = SpaceTimeGrid::default_steps(n0, spec.T);
    BallSampler sampler(a, seed);
    for (int n : ns) {
        int mult = n / n0;
        double worst = 0.0;
        for (int idx = 0; idx < pairs; ++idx) {
            Control h1 = sampler.sample(n0, m0, spec.T, 2 * idx).refined(n, m0 * mult);
            Control h2 = sampler.sample(n0, m0, spec.T, 2 * idx + 1).refined(n, m0 * mult);
            double dist = h1.distance_l2(h2);
            if (dist < 1e-12) continue;
            DiscretePath f1 = upsilon_n(spec, h1);
            DiscretePath f2 = upsilon_n(spec, h2);
            double sup = 0.0;
            for (int i = 0; i <= f1.m(); ++i)
                for (int k = 0; k <= f1.n(); ++k)
                    sup = std::max(sup, std::fabs(f1.pos(i, k) - f2.pos(i, k)));
            worst = std::max(worst, sup / dist);
        }
        rep.maxima.push_back(worst);
        rep.overall = std::max(rep.overall, worst);
    }
    return rep;
}

// sup error of the n-solve against the n_ref solve on the shared space-time
// grid, for each n, plus the fitted decay order in n.
inline ErrorCurve sup_error_curve(const ProblemSpec& spec, const Control& h,
                                  const std::vector<int>& ns, int n_ref) {
    ErrorCurve curve;
    curve.ns = ns;
    int m_ref = h.m;
    {
        int need = SpaceTimeGrid::default_steps(n_ref, h.T);
        int mult = (need + h.m - 1) / h.m;
        m_ref *= mult;
    }
    for (int n : ns) {
        if (n_ref % n != 0) throw DomainError("sup_error_curve: n must divide n_ref");
        if (n % h.n != 0) throw DomainError("sup_error_curve: control grid must divide n");
    }
    DiscretePath ref = upsilon_n(spec, h.refined(n_ref, m_ref));
    double maxerr = 0.0;
    for (int n : ns) {
        DiscretePath sol = upsilon_n(spec, h.refined(n, m_ref));
        double e = sol.sup_diff_common_grid(ref);
        curve.errors.push_back(e);
        maxerr = std::max(maxerr, e);
    }
    curve.all_zero = maxerr <= 1e-14;
    curve.fitted_order = curve.all_zero ? 0.0 : fit_log_order(curve.ns, curve.errors);
    return curve;
}

} // namespace waverate
