#pragma once

#include "waverate/grid.hpp"
#include "waverate/rng.hpp"

#include <cmath>
#include <vector>

namespace waverate {

// Square-integrable control, piecewise constant on the space-time cells
// [t_i, t_{i+1}) x [k/n, (k+1)/n). Spatial cell-constancy is what makes the
// discrete solution map invertible on this class. The L2 norm is the exact
// cell sum  sum h_{ik}^2 * dt * (1/n).
struct Control {
    int n = 2;
    int m = 1;
    double T = 1.0;
    std::vector<double> cells; // m*n, row i = time cell, column k = space cell

    Control() = default;
    Control(int n_, int m_, double T_)
        : n(n_), m(m_), T(T_), cells(static_cast<std::size_t>(n_) * m_, 0.0) {
        if (n < 2 || m < 1 || !(T > 0.0)) throw DomainError("Control: bad grid");
    }

    double dt() const { return T / m; }
    double& at(int i, int k) { return cells[static_cast<std::size_t>(i) * n + k]; }
    double at(int i, int k) const { return cells[static_cast<std::size_t>(i) * n + k]; }

    double l2_norm_sq() const {
        double s = 0.0;
        for (double c : cells) s += c * c;
        return s * dt() / n;
    }
    double l2_norm() const { return std::sqrt(l2_norm_sq()); }

    void scale(double a) {
        for (double& c : cells) c *= a;
    }

    Control& operator+=(const Control& o) {
        for (std::size_t i = 0; i < cells.size(); ++i) cells[i] += o.cells[i];
        return *this;
    }

    double distance_l2(const Control& o) const {
        double s = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double d = cells[i] - o.cells[i];
            s += d * d;
        }
        return std::sqrt(s * dt() / n);
    }

    // Exact refinement onto a finer grid whose cells subdivide ours; the same
    // L2 element, so the norm is preserved to roundoff.
    Control refined(int n2, int m2) const {
        if (n2 % n != 0 || m2 % m != 0)
            throw DomainError("Control::refined: target grid must be a multiple");
        int rs = n2 / n, rt = m2 / m;
        Control out(n2, m2, T);
        for (int i = 0; i < m2; ++i)
            for (int k = 0; k < n2; ++k)
                out.at(i, k) = at(i / rt, k / rs);
        return out;
    }

    static Control zeros(int n, int m, double T) { return Control(n, m, T); }
};

// Random controls in the L2 ball of a given radius: a few low space-time
// modes with decaying Gaussian coefficients, rescaled onto a deterministic
// radius fraction. The spatial profile is built from phi_j evaluated at cell
// anchors, so samples vanish on [0, 1/n) -- the cell the Dirichlet corner
// makes invisible to the dynamics -- and lie in the invertible class.
class BallSampler {
public:
    BallSampler(double radius, std::uint64_t seed) : radius_(radius), seed_(seed) {}

    // index selects an independent stream; identical (seed,index) pairs
    // reproduce the same control on refined grids via Control::refined.
    Control sample(int n, int m, double T, std::uint64_t index) const {
        Rng rng(seed_, 0x8c0ffee + index);
        int jmax = std::min(n - 1, 3);
        int lmax = 4;
        Control h(n, m, T);
        for (int j = 1; j <= jmax; ++j) {
            for (int l = 0; l <= lmax; ++l) {
                double amp = rng.normal() / (1.0 + j * j + l * l);
                for (int i = 0; i < m; ++i) {
                    double tmid = (i + 0.5) * T / m;
                    double tim = std::cos(l * kPi * tmid / T);
                    for (int k = 1; k < n; ++k)
                        h.at(i, k) += amp * tim * sine_basis(j, static_cast<double>(k) / n);
                }
            }
        }
        double norm = h.l2_norm();
        double frac = 0.5 + 0.5 * rng.uniform();
        if (norm > 0.0) h.scale(radius_ * frac / norm);
        return h;
    }

    double radius() const { return radius_; }

private:
    double radius_;
    std::uint64_t seed_;
};

} // namespace waverate
