#pragma once

#include "waverate/grid.hpp"
#include "waverate/rng.hpp"

#include <cmath>
#include <vector>

namespace waverate {

// Nodal trajectory of the semidiscrete wave system: positions and velocities
// at every grid time and node (boundary columns pinned to zero). Spatial
// sections are polygonal; in time each node interpolates as the cubic Hermite
// of its stored position/velocity pair, which keeps a consistent accessor for
// the second time derivative at cell midpoints: on [t_i, t_{i+1}] the Hermite
// second derivative at the midpoint is (v_{i+1} - v_i)/dt, the average force
// the integrator actually applied over the step. Positions are never
// re-differenced.
class DiscretePath {
public:
    DiscretePath() = default;
    DiscretePath(int n, int m, double T)
        : n_(n), m_(m), T_(T), dt_(T / m),
          pos_(static_cast<std::size_t>(m + 1) * (n + 1), 0.0),
          vel_(static_cast<std::size_t>(m + 1) * (n + 1), 0.0) {}

    int n() const { return n_; }
    int m() const { return m_; }
    double T() const { return T_; }
    double dt() const { return dt_; }
    double time(int i) const { return dt_ * i; }

    double& pos(int i, int k) { return pos_[idx(i, k)]; }
    double pos(int i, int k) const { return pos_[idx(i, k)]; }
    double& vel(int i, int k) { return vel_[idx(i, k)]; }
    double vel(int i, int k) const { return vel_[idx(i, k)]; }

    NodalVector positions_at(int i) const {
        NodalVector w(n_);
        for (int k = 0; k <= n_; ++k) w[k] = pos(i, k);
        return w;
    }

    // Hermite-cubic midpoint state of time cell i
    double mid_pos(int i, int k) const {
        return 0.5 * (pos(i, k) + pos(i + 1, k)) + dt_ * (vel(i, k) - vel(i + 1, k)) / 8.0;
    }
    double mid_acc(int i, int k) const { return (vel(i + 1, k) - vel(i, k)) / dt_; }

    NodalVector mid_positions(int i) const {
        NodalVector w(n_);
        for (int k = 1; k < n_; ++k) w[k] = mid_pos(i, k);
        return w;
    }

    double node_value(double t, int k) const {
        int i = cell_of(t);
        double s = (t - time(i)) / dt_;
        double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        double h10 = s * (1.0 - s) * (1.0 - s);
        double h01 = s * s * (3.0 - 2.0 * s);
        double h11 = s * s * (s - 1.0);
        return h00 * pos(i, k) + h10 * dt_ * vel(i, k) + h01 * pos(i + 1, k) +
               h11 * dt_ * vel(i + 1, k);
    }

    double node_velocity(double t, int k) const {
        int i = cell_of(t);
        double s = (t - time(i)) / dt_;
        double g00 = 6.0 * s * (s - 1.0);
        double g10 = (3.0 * s - 1.0) * (s - 1.0);
        double g01 = -g00;
        double g11 = s * (3.0 * s - 2.0);
        return (g00 * pos(i, k) + g01 * pos(i + 1, k)) / dt_ + g10 * vel(i, k) +
               g11 * vel(i + 1, k);
    }

    // polygonal in space, Hermite in time
    double value(double t, double x) const {
        int k = kappa_index(n_, x);
        if (k >= n_) return node_value(t, n_);
        double frac = x * n_ - k;
        if (frac < 0.0) frac = 0.0;
        if (frac > 1.0) frac = 1.0;
        double a = node_value(t, k);
        double b = node_value(t, k + 1);
        return a + frac * (b - a);
    }

    double terminal(double x0) const {
        int k = kappa_index(n_, x0);
        if (k >= n_) return pos(m_, n_);
        double frac = x0 * n_ - k;
        return pos(m_, k) + frac * (pos(m_, k + 1) - pos(m_, k));
    }

    double sup_norm() const {
        double s = 0.0;
        for (double p : pos_) s = std::max(s, std::fabs(p));
        return s;
    }

    // sup over shared nodes and times of |this - fine|; requires the finer
    // grid to be a multiple in both directions
    double sup_diff_common_grid(const DiscretePath& fine) const {
        if (fine.n_ % n_ != 0 || fine.m_ % m_ != 0)
            throw DomainError("sup_diff_common_grid: grids are not nested");
        int rs = fine.n_ / n_, rt = fine.m_ / m_;
        double worst = 0.0;
        for (int i = 0; i <= m_; ++i)
            for (int k = 0; k <= n_; ++k)
                worst = std::max(worst,
                                 std::fabs(pos(i, k) - fine.pos(i * rt, k * rs)));
        return worst;
    }

    // sampled Holder-1/2 seminorm over random space-time pairs
    double holder_seminorm(int pairs, std::uint64_t seed) const {
        Rng rng(seed, 0x401de5);
        double worst = 0.0;
        for (int p = 0; p < pairs; ++p) {
            double t = rng.uniform(0.0, T_);
            double s = rng.uniform(0.0, T_);
            double x = rng.uniform();
            double y = rng.uniform();
            double den = std::sqrt(std::fabs(x - y)) + std::sqrt(std::fabs(t - s));
            if (den < 1e-9) continue;
            worst = std::max(worst, std::fabs(value(t, x) - value(s, y)) / den);
        }
        return worst;
    }

private:
    int n_ = 0, m_ = 0;
    double T_ = 0.0, dt_ = 0.0;
    std::vector<double> pos_, vel_;

    std::size_t idx(int i, int k) const {
        return static_cast<std::size_t>(i) * (n_ + 1) + k;
    }
    int cell_of(double t) const {
        if (!(t >= 0.0 && t <= T_ * (1.0 + 1e-12)))
            throw DomainError("DiscretePath: time outside [0,T]");
        int i = static_cast<int>(std::floor(t / dt_));
        if (i >= m_) i = m_ - 1;
        while (i < m_ - 1 && time(i + 1) <= t) ++i;
        while (i > 0 && time(i) > t) --i;
        return i;
    }
};

} // namespace waverate
