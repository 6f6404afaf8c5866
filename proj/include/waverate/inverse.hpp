#pragma once

#include "waverate/control.hpp"
#include "waverate/path.hpp"
#include "waverate/skeleton.hpp"

#include <cmath>
#include <utility>

namespace waverate {

// Checks of the path-class conditions under which the discrete solution map
// has the closed-form inverse: correct initial position/velocity, Dirichlet
// boundary, and a finite second-derivative proxy in time. Spatial
// polygonality and nodal C^2-in-time hold structurally for DiscretePath, so
// they are recorded as exact.
struct MembershipReport {
    double init_pos_violation = 0.0;
    double init_vel_violation = 0.0;
    double boundary_violation = 0.0;
    double accel_l2 = 0.0; // L2 norm of the midpoint second-derivative proxy
    bool polygonal = true;

    bool pass(double tol = 1e-9) const {
        return polygonal && init_pos_violation <= tol && init_vel_violation <= tol &&
               boundary_violation <= tol && std::isfinite(accel_l2);
    }
};

inline MembershipReport check_membership(const ProblemSpec& spec, const DiscretePath& f) {
    MembershipReport rep;
    int n = f.n(), m = f.m();
    for (int k = 1; k < n; ++k) {
        double xk = static_cast<double>(k) / n;
        rep.init_pos_violation =
            std::max(rep.init_pos_violation, std::fabs(f.pos(0, k) - spec.u0.eval(xk)));
        rep.init_vel_violation =
            std::max(rep.init_vel_violation, std::fabs(f.vel(0, k) - spec.v0.eval(xk)));
    }
    for (int i = 0; i <= m; ++i) {
        rep.boundary_violation = std::max(rep.boundary_violation, std::fabs(f.pos(i, 0)));
        rep.boundary_violation = std::max(rep.boundary_violation, std::fabs(f.pos(i, n)));
    }
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
        for (int k = 1; k < n; ++k) {
            double a = f.mid_acc(i, k);
            acc += a * a;
        }
    rep.accel_l2 = std::sqrt(acc * f.dt() / n);
    return rep;
}

// Closed-form inverse of the discrete solution map on its path class:
//   h(t,x) = [ d2f/dt2 - Lap_n f - b(f) ] / sigma(f)   at (t, kappa_n(x)),
// sampled at time-cell midpoints (second-order consistent with the
// cell-average reading of the control). The second time derivative comes
// from the stored velocity increments, i.e. the force the integrator applied,
// never from re-differencing positions. Requires |sigma| at every visited
// state to stay above sigma_floor.
inline Control invert_upsilon_n(const ProblemSpec& spec, const DiscretePath& f,
                                double sigma_floor = kSigmaFloor,
                                double membership_tol = 1e-9) {
    MembershipReport ms = check_membership(spec, f);
    if (!ms.pass(membership_tol))
        throw DomainError("invert_upsilon_n: path is not in the invertible class");
    int n = f.n(), m = f.m();
    Control h(n, m, f.T());
    double sig0 = spec.sigma.eval(0.0);
    if (std::fabs(sig0) < sigma_floor)
        throw DomainError("invert_upsilon_n: sigma vanishes at the boundary state");
    double b0 = spec.b.eval(0.0);
    for (int i = 0; i < m; ++i) {
        NodalVector mid = f.mid_positions(i);
        NodalVector lap = discrete_laplacian(mid);
        h.at(i, 0) = -b0 / sig0;
        for (int k = 1; k < n; ++k) {
            double u = mid[k];
            double sig = spec.sigma.eval(u);
            if (std::fabs(sig) < sigma_floor)
                throw DomainError("invert_upsilon_n: sigma below floor along the trajectory");
            h.at(i, k) = (f.mid_acc(i, k) - lap[k] - spec.b.eval(u)) / sig;
        }
    }
    return h;
}

// Cubic bump with plateau value delta on the grid cell holding x0, cubic
// ramps down to zero at both endpoints. Its maximum is the plateau value and
// |p''| <= 6|delta| max(kap^-2, (1-kap-1/n)^-2).
struct TerminalBump {
    int n;
    double x0;
    double delta;
    double kap; // kappa_n(x0)

    TerminalBump(int n_, double x0_, double delta_) : n(n_), x0(x0_), delta(delta_) {
        kap = kappa(n, x0);
        double lo = 1.0 / n, hi = static_cast<double>(n - 2) / n;
        if (!(kap >= lo - 1e-15 && kap <= hi + 1e-15))
            throw DomainError("TerminalBump: n too small for the bump support at x0");
    }

    double operator()(double x) const {
        double right = kap + 1.0 / n;
        if (x <= kap) {
            double r = (x - kap) / kap;
            return delta * (1.0 + r * r * r);
        }
        if (x >= right) {
            double r = (x - right) / (1.0 - right);
            return delta * (1.0 - r * r * r);
        }
        return delta;
    }

    NodalVector nodal() const {
        NodalVector w(n);
        for (int k = 1; k < n; ++k) w[k] = (*this)(static_cast<double>(k) / n);
        return w;
    }

    double second_derivative_bound() const {
        double right = kap + 1.0 / n;
        double a = 1.0 / (kap * kap);
        double b = 1.0 / ((1.0 - right) * (1.0 - right));
        return 6.0 * std::fabs(delta) * std::max(a, b);
    }
};

// Adds (t^2/T^2) * PiLin(bump) to the path so the terminal value at x0 lands
// on y exactly while initial position and velocity stay untouched.
inline DiscretePath modify_terminal(const DiscretePath& f, double y, double x0) {
    double ytilde = f.terminal(x0);
    if (!std::isfinite(ytilde)) throw DomainError("modify_terminal: terminal value not finite");
    TerminalBump bump(f.n(), x0, y - ytilde);
    NodalVector w = bump.nodal();
    DiscretePath out = f;
    double T = f.T();
    for (int i = 0; i <= f.m(); ++i) {
        double t = f.time(i);
        double a = t * t / (T * T);
        double da = 2.0 * t / (T * T);
        for (int k = 1; k < f.n(); ++k) {
            out.pos(i, k) += a * w[k];
            out.vel(i, k) += da * w[k];
        }
    }
    return out;
}

// Modified path plus its control in closed form. With htilde the exact
// control of ftilde, the second-derivative-minus-Laplacian difference between
// the two paths is (2/T^2) w - (t^2/T^2) Lap_n w, so no re-differentiation is
// needed:
//   h = [ sigma(ftilde) htilde + b(ftilde) - b(f)
//         + 2 w / T^2 - t^2 Lap_n w / T^2 ] / sigma(f).
// When htilde = invert_upsilon_n(ftilde) this agrees with
// invert_upsilon_n(modify_terminal(ftilde)) identically.
inline std::pair<DiscretePath, Control> modified_control(const ProblemSpec& spec,
                                                         const DiscretePath& ftilde,
                                                         const Control& htilde, double y,
                                                         double x0,
                                                         double sigma_floor = kSigmaFloor) {
    if (htilde.n != ftilde.n() || htilde.m != ftilde.m())
        throw DomainError("modified_control: control and path grids differ");
    double ytilde = ftilde.terminal(x0);
    TerminalBump bump(ftilde.n(), x0, y - ytilde);
    NodalVector w = bump.nodal();
    NodalVector lapw = discrete_laplacian(w);
    DiscretePath f = modify_terminal(ftilde, y, x0);
    int n = ftilde.n(), m = ftilde.m();
    double T = ftilde.T(), dt = ftilde.dt();
    Control h(n, m, T);
    for (int i = 0; i < m; ++i) {
        double tmid = (i + 0.5) * dt;
        double a = tmid * tmid / (T * T);
        h.at(i, 0) = htilde.at(i, 0);
        for (int k = 1; k < n; ++k) {
            double ut = ftilde.mid_pos(i, k);
            double um = ut + a * w[k];
            double sig_new = spec.sigma.eval(um);
            if (std::fabs(sig_new) < sigma_floor)
                throw DomainError("modified_control: sigma below floor along the modified path");
            double num = spec.sigma.eval(ut) * htilde.at(i, k) + spec.b.eval(ut) -
                         spec.b.eval(um) + 2.0 * w[k] / (T * T) - a * lapw[k];
            h.at(i, k) = num / sig_new;
        }
    }
    return {std::move(f), std::move(h)};
}

} // namespace waverate
