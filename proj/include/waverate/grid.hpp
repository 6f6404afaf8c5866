#pragma once

#include "waverate/problem.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace waverate {

// Uniform mesh: n spatial cells on [0,1] (nodes k/n, interior 1..n-1),
// m time steps on [0,T]. The time step must satisfy the explicit wave
// stability bound dt <= stability_fraction / n; the largest frequency of the
// discrete Laplacian is below 2n, and the leapfrog core needs dt*w_max < 2.
struct SpaceTimeGrid {
    int n = 2;
    int m = 1;
    double T = 1.0;
    double stability_fraction = 0.5;

    SpaceTimeGrid() = default;
    SpaceTimeGrid(int n_, int m_, double T_, double sf = 0.5)
        : n(n_), m(m_), T(T_), stability_fraction(sf) {
        if (n < 2) throw DomainError("spatial resolution n must be >= 2");
        if (m < 1) throw DomainError("time steps m must be >= 1");
        if (!(T > 0.0)) throw DomainError("horizon T must be positive");
        if (!(sf > 0.0 && sf <= 1.0)) throw DomainError("stability_fraction must be in (0,1]");
        if (dt() > stability_fraction / n + 1e-15)
            throw DomainError("dt exceeds the stability bound stability_fraction/n");
    }

    double dt() const { return T / m; }
    double node(int k) const { return static_cast<double>(k) / n; }
    double time(int i) const { return T * static_cast<double>(i) / m; }

    // smallest step count with dt <= stability_fraction/(factor*n)
    static int default_steps(int n, double T, double sf = 0.5, int factor = 2) {
        double need = factor * n * T / sf;
        int m = static_cast<int>(std::ceil(need - 1e-12));
        return m < 1 ? 1 : m;
    }
};

// Cell index of z in [0,1]: the k with k/n <= z < (k+1)/n, and n at z = 1.
// The floor is corrected so that nodes stored as doubles land on themselves
// exactly even when z*n rounds across an integer.
inline int kappa_index(int n, double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw DomainError("kappa: z outside [0,1]");
    int k = static_cast<int>(std::floor(z * n));
    if (k > n) k = n;
    while (k < n && static_cast<double>(k + 1) / n <= z) ++k;
    while (k > 0 && static_cast<double>(k) / n > z) --k;
    return k;
}

inline double kappa(int n, double z) {
    return static_cast<double>(kappa_index(n, z)) / n;
}

// Values on the n+1 nodes k/n, boundary entries included.
struct NodalVector {
    int n = 0;
    std::vector<double> v; // size n+1

    NodalVector() = default;
    explicit NodalVector(int n_) : n(n_), v(static_cast<std::size_t>(n_) + 1, 0.0) {}
    NodalVector(int n_, std::vector<double> vals) : n(n_), v(std::move(vals)) {
        if (v.size() != static_cast<std::size_t>(n) + 1)
            throw DomainError("NodalVector: wrong length");
    }
    static NodalVector sample(int n, const std::function<double(double)>& f) {
        NodalVector w(n);
        for (int k = 0; k <= n; ++k) w.v[k] = f(static_cast<double>(k) / n);
        return w;
    }
    double& operator[](int k) { return v[static_cast<std::size_t>(k)]; }
    double operator[](int k) const { return v[static_cast<std::size_t>(k)]; }
    bool dirichlet(double tol = 0.0) const {
        return std::fabs(v.front()) <= tol && std::fabs(v.back()) <= tol;
    }
};

// Polygonal interpolation with nodes k/n. Affine on each cell; reproduces the
// stored nodal values exactly, hence idempotent.
class PiecewiseLinearFn {
public:
    PiecewiseLinearFn() = default;
    explicit PiecewiseLinearFn(NodalVector w) : w_(std::move(w)) {}

    double operator()(double x) const {
        int k = kappa_index(w_.n, x);
        if (k >= w_.n) return w_[w_.n];
        double frac = x * w_.n - k;
        if (frac < 0.0) frac = 0.0;
        if (frac > 1.0) frac = 1.0;
        return w_[k] + frac * (w_[k + 1] - w_[k]);
    }

    const NodalVector& nodal() const { return w_; }
    int n() const { return w_.n; }

private:
    NodalVector w_;
};

inline PiecewiseLinearFn pi_n(int n, const std::function<double(double)>& f) {
    return PiecewiseLinearFn(NodalVector::sample(n, f));
}

inline PiecewiseLinearFn pi_n(NodalVector w) { return PiecewiseLinearFn(std::move(w)); }

// Second central difference n^2(w_{k-1} - 2 w_k + w_{k+1}) on interior nodes,
// zero on the boundary. Strict mode rejects inputs that do not vanish at the
// ends.
inline NodalVector discrete_laplacian(const NodalVector& w, bool strict = true) {
    if (strict && !w.dirichlet())
        throw DomainError("discrete_laplacian: nonzero boundary values");
    int n = w.n;
    NodalVector out(n);
    double n2 = static_cast<double>(n) * n;
    for (int k = 1; k < n; ++k)
        out[k] = n2 * (w[k - 1] - 2.0 * w[k] + w[k + 1]);
    return out;
}

// phi_j(x) = sqrt(2) sin(j pi x)
inline double sine_basis(int j, double x) {
    return 1.4142135623730950488016887242097 * std::sin(j * kPi * x);
}

// sin(pi * num / den) with the argument reduced in integers first, so nodal
// sines keep full precision for large mode-times-node products
inline double sine_pi_rational(long num, long den) {
    long two = 2 * den;
    long r = num % two;
    if (r < 0) r += two;
    double sign = 1.0;
    if (r >= den) {
        sign = -1.0;
        r -= den;
    }
    if (2 * r > den) r = den - r;
    return sign * std::sin(kPi * static_cast<double>(r) / static_cast<double>(den));
}

// phi_j(k/n) through the exact reduction
inline double sine_node(int j, int k, int n) {
    return 1.4142135623730950488016887242097 *
           sine_pi_rational(static_cast<long>(j) * k, n);
}

// c_j^n = sin^2(j pi / 2n) / (j pi / 2n)^2, always within [4/pi^2, 1].
inline double eigenfactor(int n, int j) {
    if (j < 1 || j > n - 1) throw DomainError("eigenfactor: mode out of range");
    double t = 0.5 * j * kPi / n;
    double s = std::sin(t) / t;
    return s * s;
}

// discrete mode frequency j pi sqrt(c_j^n) = 2n sin(j pi / 2n)
inline double mode_frequency(int n, int j) {
    return j * kPi * std::sqrt(eigenfactor(n, j));
}

// | integral of (Lap u)(v o kappa) - (u o kappa)(Lap v) |, both integrals as
// exact cell sums: each integrand is constant on every cell.
inline double ibp_defect(const NodalVector& u, const NodalVector& v) {
    if (u.n != v.n) throw DomainError("ibp_defect: size mismatch");
    int n = u.n;
    NodalVector lu = discrete_laplacian(u);
    NodalVector lv = discrete_laplacian(v);
    double left = 0.0, right = 0.0;
    for (int k = 1; k < n; ++k) {
        left += lu[k] * v[k];
        right += u[k] * lv[k];
    }
    return std::fabs(left - right) / n;
}

// max_{j,l} | (1/n) sum_k phi_j(k/n) phi_l(k/n) - delta_{jl} |
inline double orthonormality_defect(int n) {
    double worst = 0.0;
    for (int j = 1; j < n; ++j) {
        for (int l = j; l < n; ++l) {
            double s = 0.0;
            for (int k = 1; k < n; ++k)
                s += sine_node(j, k, n) * sine_node(l, k, n);
            s /= n;
            double target = (j == l) ? 1.0 : 0.0;
            worst = std::max(worst, std::fabs(s - target));
        }
    }
    return worst;
}

// max node defect of  Lap phi_j + j^2 pi^2 c_j^n phi_j = 0
inline double eigenrelation_defect(int n) {
    double worst = 0.0;
    for (int j = 1; j < n; ++j) {
        NodalVector phi(n);
        for (int k = 1; k < n; ++k) phi[k] = sine_node(j, k, n);
        NodalVector lap = discrete_laplacian(phi);
        double lam = j * j * kPi * kPi * eigenfactor(n, j);
        for (int k = 1; k < n; ++k)
            worst = std::max(worst, std::fabs(lap[k] + lam * phi[k]));
    }
    return worst;
}

} // namespace waverate
