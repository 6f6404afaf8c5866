#pragma once

#include "waverate/inverse.hpp"
#include "waverate/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace waverate {

// exact cell sum of (1/2) ||h||^2
inline double action(const Control& h) { return 0.5 * h.l2_norm_sq(); }

// Pi_n hat weights of the observation point on the interior nodes
inline void observation_weights(int n, double x0, std::vector<double>& e) {
    e.assign(static_cast<std::size_t>(n) - 1, 0.0);
    int k = kappa_index(n, x0);
    double frac = x0 * n - k;
    if (frac < 0.0) frac = 0.0;
    if (frac > 1.0) frac = 1.0;
    if (k >= 1 && k <= n - 1) e[k - 1] += 1.0 - frac;
    if (k + 1 >= 1 && k + 1 <= n - 1) e[k] += frac;
}

// Exact gradient of c(h) = Upsilon_n(h)(T, x0) with respect to the control
// cells, by transposing the integrator step by step (half kick, two half
// rotations, half kick) along the stored trajectory. Slopes of b and sigma
// come from central differences; the expression module does not do symbolic
// differentiation.
inline Control constraint_gradient(const ProblemSpec& spec, const Control& h,
                                   const DiscretePath& path, double x0) {
    int n = h.n, m = h.m;
    double dt = path.dt();
    Control grad(n, m, h.T);
    int d = n - 1;
    std::vector<double> gq(d), gp(d, 0.0);
    observation_weights(n, x0, gq);
    WaveRotation half_rot(n, dt / 2.0);
    for (int i = m - 1; i >= 0; --i) {
        const double* hrow = &h.cells[static_cast<std::size_t>(i) * n];
        // second half kick, evaluated at the end-of-step positions
        for (int k = 0; k < d; ++k) {
            double u = path.pos(i + 1, k + 1);
            double slope = spec.b.derivative(u) + spec.sigma.derivative(u) * hrow[k + 1];
            gq[k] += 0.5 * dt * slope * gp[k];
            grad.at(i, k + 1) += 0.5 * dt * spec.sigma.eval(u) * gp[k];
        }
        half_rot.apply_transpose(gq, gp);
        half_rot.apply_transpose(gq, gp);
        // first half kick, at the start-of-step positions
        for (int k = 0; k < d; ++k) {
            double u = path.pos(i, k + 1);
            double slope = spec.b.derivative(u) + spec.sigma.derivative(u) * hrow[k + 1];
            gq[k] += 0.5 * dt * slope * gp[k];
            grad.at(i, k + 1) += 0.5 * dt * spec.sigma.eval(u) * gp[k];
        }
    }
    return grad;
}

struct OptimizerOptions {
    double mu_init = 1e2;
    double mu_factor = 10.0;
    double mu_max = 1e8;          // continuation runs until feasibility or mu_max
    double feas_tol_rel = 1e-6;   // stop stages once |residual| <= tol * max(1, |y - y0|)
    double grad_tol_rel = 1e-8;   // inner stop: ||grad||_L2 <= tol * max(1, ||h||)
    int max_inner = 500;
    int lbfgs_memory = 10;
    int multistart = 0;
    std::uint64_t seed = 1234;
    int m = 0;                    // 0: pick from the resolution (dt <= min(1/(16 n), T/1024))
    int holder_pairs = 10000;
};

struct RateResult {
    double y = 0.0;
    int n = 0;
    int m = 0;
    double value = 0.0;      // (1/2)||h*||^2, an upper bound by construction
    Control h_star;
    DiscretePath f_star;     // terminal pinned to y exactly
    double deterministic_terminal = 0.0;
    double residual_before_modification = 0.0;
    int iterations = 0;
    int stages = 0;
    bool converged = true;
    std::string feasibility_method = "modified";
    double holder_seminorm = 0.0;
};

inline int rate_default_steps(int n, double T) {
    int m = static_cast<int>(std::ceil(16.0 * n * T - 1e-12));
    int floor_m = static_cast<int>(std::ceil(1024.0 * T - 1e-12));
    return std::max(m, floor_m);
}

namespace detail {

struct PenaltyEval {
    double objective;
    double c;
    DiscretePath path;
};

inline PenaltyEval eval_penalty(const ProblemSpec& spec, const Control& h, double y, double mu,
                                double x0) {
    PenaltyEval ev{0.0, 0.0, upsilon_n(spec, h)};
    ev.c = ev.path.terminal(x0) - y;
    ev.objective = action(h) + 0.5 * mu * ev.c * ev.c;
    return ev;
}

// L-BFGS with Armijo backtracking on the penalty objective. Returns the
// number of iterations spent; sets converged=false on stagnation.
inline int lbfgs_stage(const ProblemSpec& spec, Control& h, double y, double mu, double x0,
                       const OptimizerOptions& opt, bool& converged) {
    const std::size_t dim = h.cells.size();
    const double cellw = h.dt() / h.n; // L2 weight of one cell
    std::vector<std::vector<double>> s_hist, y_hist;
    std::vector<double> rho_hist;
    std::vector<double> g(dim), g_prev(dim), direction(dim), h_prev(dim);

    PenaltyEval ev = eval_penalty(spec, h, y, mu, x0);
    auto fill_gradient = [&](const PenaltyEval& e, std::vector<double>& out) {
        Control cg = constraint_gradient(spec, h, e.path, x0);
        for (std::size_t i = 0; i < dim; ++i)
            out[i] = cellw * h.cells[i] + mu * e.c * cg.cells[i];
    };
    fill_gradient(ev, g);

    int it = 0;
    int flat_steps = 0;
    for (; it < opt.max_inner; ++it) {
        double gnorm_l2 = 0.0;
        for (double v : g) gnorm_l2 += v * v;
        gnorm_l2 = std::sqrt(gnorm_l2 / cellw); // ||representer||_L2
        if (gnorm_l2 <= opt.grad_tol_rel * std::max(1.0, h.l2_norm())) break;
        if (flat_steps >= 3) break; // objective at its floating-point floor

        // two-loop recursion
        for (std::size_t i = 0; i < dim; ++i) direction[i] = -g[i];
        std::vector<double> alpha(s_hist.size());
        for (int j = static_cast<int>(s_hist.size()) - 1; j >= 0; --j) {
            double a = 0.0;
            for (std::size_t i = 0; i < dim; ++i) a += s_hist[j][i] * direction[i];
            a *= rho_hist[j];
            alpha[j] = a;
            for (std::size_t i = 0; i < dim; ++i) direction[i] -= a * y_hist[j][i];
        }
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            const auto& sb = s_hist.back();
            const auto& yb = y_hist.back();
            for (std::size_t i = 0; i < dim; ++i) {
                sy += sb[i] * yb[i];
                yy += yb[i] * yb[i];
            }
            double gamma = sy / std::max(yy, 1e-300);
            for (std::size_t i = 0; i < dim; ++i) direction[i] *= gamma;
        }
        for (std::size_t j = 0; j < s_hist.size(); ++j) {
            double b = 0.0;
            for (std::size_t i = 0; i < dim; ++i) b += y_hist[j][i] * direction[i];
            b *= rho_hist[j];
            for (std::size_t i = 0; i < dim; ++i)
                direction[i] += (alpha[j] - b) * s_hist[j][i];
        }

        double dg = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dg += direction[i] * g[i];
        if (dg >= 0.0) { // defective curvature pair, fall back to steepest descent
            for (std::size_t i = 0; i < dim; ++i) direction[i] = -g[i];
            dg = 0.0;
            for (std::size_t i = 0; i < dim; ++i) dg += direction[i] * g[i];
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        h_prev = h.cells;
        g_prev = g;
        double step = 1.0;
        bool accepted = false;
        PenaltyEval trial = ev;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t i = 0; i < dim; ++i) h.cells[i] = h_prev[i] + step * direction[i];
            trial = eval_penalty(spec, h, y, mu, x0);
            if (trial.objective <= ev.objective + 1e-4 * step * dg) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            h.cells = h_prev;
            break; // cannot descend along the gradient: numerical floor
        }
        double decrease = ev.objective - trial.objective;
        if (decrease <= 1e-13 * std::max(1.0, std::fabs(ev.objective)))
            ++flat_steps;
        else
            flat_steps = 0;
        ev = trial;
        fill_gradient(ev, g);

        std::vector<double> s(dim), yv(dim);
        double sy = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            s[i] = h.cells[i] - h_prev[i];
            yv[i] = g[i] - g_prev[i];
            sy += s[i] * yv[i];
        }
        if (sy > 1e-300) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.lbfgs_memory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
    }
    if (it == opt.max_inner) converged = false;
    return it;
}

// least-action warm start from the constraint linearized at h = 0: the
// Gauss-Newton step  h = (y - y0) g0 / ||g0||^2  with representer
// g0(s,z) = sigma(f0) * Gn_{T-s}(x0, kappa_n(z)) along the h=0 path.
inline Control warm_start(const ProblemSpec& spec, int n, int m, double y, double y0,
                          const DiscretePath& f0, double x0) {
    DiscreteGreen dg(n);
    Control g0(n, m, spec.T);
    double T = spec.T, dt = T / m;
    for (int i = 0; i < m; ++i) {
        double tmid = (i + 0.5) * dt;
        for (int k = 1; k < n; ++k) {
            double kern = 0.0;
            for (int j = 1; j < n; ++j)
                kern += std::sin(dg.omega(j) * (T - tmid)) / dg.omega(j) * dg.phi_lin(j, x0) *
                        sine_basis(j, static_cast<double>(k) / n);
            g0.at(i, k) = kern * spec.sigma.eval(f0.mid_pos(i, k));
        }
    }
    double nrm2 = g0.l2_norm_sq();
    if (nrm2 < 1e-30) return Control::zeros(n, m, spec.T);
    g0.scale((y - y0) / nrm2);
    return g0;
}

struct SingleRun {
    Control h;
    DiscretePath path;
    double residual = 0.0;
    int iterations = 0;
    int stages = 0;
    bool converged = true;
};

inline SingleRun run_penalty(const ProblemSpec& spec, Control h, double y, double x0,
                             const OptimizerOptions& opt, double feas_scale) {
    SingleRun run;
    run.h = std::move(h);
    double mu = opt.mu_init;
    double feas_tol = opt.feas_tol_rel * feas_scale;
    for (;;) {
        ++run.stages;
        run.iterations += lbfgs_stage(spec, run.h, y, mu, x0, opt, run.converged);
        PenaltyEval ev = eval_penalty(spec, run.h, y, mu, x0);
        run.residual = ev.c;
        run.path = std::move(ev.path);
        if (std::fabs(run.residual) <= feas_tol) break;
        mu *= opt.mu_factor;
        if (mu > opt.mu_max) break;
    }
    return run;
}

} // namespace detail

// Penalty-continuation minimization of (1/2)||h||^2 subject to the terminal
// constraint, finished by the exact terminal modification. The reported value
// is the action of the closed-form control of the modified path, so it is an
// upper bound on the rate function attained by a feasible pair (f*, h*) with
// f*(T, x0) = y exactly and h* = invert_upsilon_n(f*).
inline RateResult rate_discrete(const ProblemSpec& spec, int n, double y,
                                OptimizerOptions opt = {}) {
    int m = opt.m > 0 ? opt.m : rate_default_steps(n, spec.T);
    double x0 = spec.x0;
    DiscretePath f0 = upsilon_n_zero(spec, n, m);
    double y0 = f0.terminal(x0);
    double feas_scale = std::max(1.0, std::fabs(y - y0));

    std::vector<Control> starts;
    if (std::fabs(y - y0) <= opt.feas_tol_rel)
        starts.push_back(Control::zeros(n, m, spec.T));
    else
        starts.push_back(detail::warm_start(spec, n, m, y, y0, f0, x0));
    BallSampler sampler(std::max(1.0, starts.front().l2_norm()), opt.seed);
    for (int j = 0; j < opt.multistart; ++j)
        starts.push_back(sampler.sample(n, m, spec.T, 1000 + j));

    bool have_best = false;
    RateResult best;
    for (std::size_t si = 0; si < starts.size(); ++si) {
        detail::SingleRun run =
            detail::run_penalty(spec, std::move(starts[si]), y, x0, opt, feas_scale);
        Control h_inv = invert_upsilon_n(spec, run.path);
        auto [f_star, h_star] = modified_control(spec, run.path, h_inv, y, x0);
        double value = action(h_star);
        if (!have_best || value < best.value) {
            have_best = true;
            best.y = y;
            best.n = n;
            best.m = m;
            best.value = value;
            best.h_star = std::move(h_star);
            best.f_star = std::move(f_star);
            best.deterministic_terminal = y0;
            best.residual_before_modification = run.residual;
            best.iterations = run.iterations;
            best.stages = run.stages;
            best.converged = run.converged;
            best.feasibility_method =
                std::fabs(run.residual) <= 1e-12 ? "penalty-converged" : "modified";
        }
    }
    best.holder_seminorm = best.f_star.holder_seminorm(opt.holder_pairs, opt.seed);
    return best;
}

// Closed-form rate function for the linear class (b = 0, sigma constant):
//   (y - mu)^2 / (2 sigma^2 || G_{T-.}(x0,.) ||^2_{L2}),
// with the kernel norm an exact mode sum for the discrete kernel (n >= 2) and
// a truncated mode sum with reported tail for the continuous one (n = 0).
inline double rate_linear_oracle(const ProblemSpec& spec, int n, double y, int j_max = 1024,
                                 double* tail_bound = nullptr) {
    for (int i = 0; i <= 64; ++i) {
        double u = -4.0 + 8.0 * i / 64.0;
        if (std::fabs(spec.b.eval(u)) > 1e-13)
            throw DomainError("rate_linear_oracle: spec is not linear-class (b != 0)");
        if (std::fabs(spec.sigma.eval(u) - spec.sigma.eval(0.0)) > 1e-13)
            throw DomainError("rate_linear_oracle: spec is not linear-class (sigma not constant)");
    }
    double sig = spec.sigma.eval(0.0);
    if (std::fabs(sig) < kSigmaFloor)
        throw DomainError("rate_linear_oracle: sigma vanishes");
    double T = spec.T, x0 = spec.x0;
    double mu, norm2;
    if (n >= 2) {
        DiscreteGreen dg(n);
        mu = dg.initial_terms(spec, T, x0);
        norm2 = dg.squared_kernel_integral(T, x0);
        if (tail_bound) *tail_bound = 0.0;
    } else {
        GreenSeries gs(j_max);
        auto u0c = sine_coefficients([&](double z) { return spec.u0.eval(z); }, j_max);
        auto v0c = sine_coefficients([&](double z) { return spec.v0.eval(z); }, j_max);
        mu = gs.apply(T, x0, v0c) + gs.apply_dt(T, x0, u0c);
        norm2 = gs.squared_kernel_integral(T, x0);
        if (tail_bound) *tail_bound = gs.squared_kernel_tail(T);
    }
    double diff = y - mu;
    return diff * diff / (2.0 * sig * sig * norm2);
}

// finest-budget stand-in for the continuum rate function
inline RateResult rate_reference(const ProblemSpec& spec, double y, int n_ref,
                                 OptimizerOptions opt = {}) {
    return rate_discrete(spec, n_ref, y, opt);
}

struct StudyRow {
    double y = 0.0;
    int n = 0;
    int m = 0;
    double value = 0.0;
    double ref_value = 0.0;
    double gap = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::string feasibility_method;
    double holder_seminorm = 0.0;
    bool converged = true;
};

struct StudyTable {
    std::vector<StudyRow> rows;
    double holder_min = 0.0; // equi-coercivity face: seminorms across n must
    double holder_max = 0.0; // stay within one constant band per (spec, y)
};

// I^n(y) across resolutions against the reference resolution; optimizer
// failures propagate per cell, the study continues.
inline StudyTable convergence_study(const ProblemSpec& spec, const std::vector<double>& ys,
                                    const std::vector<int>& ns, int n_ref,
                                    OptimizerOptions opt = {}) {
    StudyTable table;
    bool first = true;
    for (double y : ys) {
        RateResult ref = rate_reference(spec, y, n_ref, opt);
        for (int n : ns) {
            RateResult r = rate_discrete(spec, n, y, opt);
            StudyRow row;
            row.y = y;
            row.n = n;
            row.m = r.m;
            row.value = r.value;
            row.ref_value = ref.value;
            row.gap = std::fabs(r.value - ref.value);
            row.residual = r.residual_before_modification;
            row.iterations = r.iterations;
            row.feasibility_method = r.feasibility_method;
            row.holder_seminorm = r.holder_seminorm;
            row.converged = r.converged;
            table.rows.push_back(row);
            if (first) {
                table.holder_min = table.holder_max = r.holder_seminorm;
                first = false;
            } else {
                table.holder_min = std::min(table.holder_min, r.holder_seminorm);
                table.holder_max = std::max(table.holder_max, r.holder_seminorm);
            }
        }
    }
    return table;
}

struct ProbeRow {
    int n = 0;
    double eps = 0.0;
    double value = 0.0;  // J^n_y of the perturbed, re-feasibilized path
    double margin = 0.0; // value - (reference - slack)
    bool feasible = true;
};

struct ProbeReport {
    std::vector<ProbeRow> rows;
    double reference = 0.0;
    double tail_margin = 0.0; // margin at the finest resolution probed
};

// Falsification probe for the liminf inequality: perturb each converged
// minimizer by a vanishing bump, restore feasibility, and check that the
// objective values do not undercut the reference rate value by more than the
// slack. Not a proof.
inline ProbeReport gamma_liminf_probe(const ProblemSpec& spec, double y,
                                      const std::vector<int>& ns, double reference_value,
                                      const std::function<double(int)>& eps_of_n,
                                      double slack = 1e-3, OptimizerOptions opt = {},
                                      double bump_at = 0.0) {
    ProbeReport rep;
    rep.reference = reference_value;
    double xp = bump_at > 0.0 ? bump_at : spec.x0 * 0.5;
    for (int n : ns) {
        ProbeRow row;
        row.n = n;
        row.eps = eps_of_n(n);
        try {
            RateResult r = rate_discrete(spec, n, y, opt);
            DiscretePath f = r.f_star;
            if (row.eps != 0.0) {
                TerminalBump pert(n, xp, row.eps);
                NodalVector w = pert.nodal();
                double T = f.T();
                for (int i = 0; i <= f.m(); ++i) {
                    double t = f.time(i);
                    for (int k = 1; k < n; ++k) {
                        f.pos(i, k) += (t * t / (T * T)) * w[k];
                        f.vel(i, k) += (2.0 * t / (T * T)) * w[k];
                    }
                }
                f = modify_terminal(f, y, spec.x0);
            }
            row.value = action(invert_upsilon_n(spec, f));
            row.margin = row.value - (reference_value - slack);
        } catch (const DomainError&) {
            row.feasible = false;
        }
        rep.rows.push_back(row);
        if (row.feasible) rep.tail_margin = row.margin;
    }
    return rep;
}

} // namespace waverate
