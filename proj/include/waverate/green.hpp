#pragma once

#include "waverate/grid.hpp"
#include "waverate/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace waverate {

// Discrete wave kernel
//   Gn_t(x,y) = sum_{j<n} sin(j pi t sqrt(c_j^n)) / (j pi sqrt(c_j^n))
//                 * PiLin(phi_j)(x) * phi_j(kappa_n(y)),
// an exact finite sum. In y it is piecewise constant per cell, so integrals
// against cell-constant data reduce to exact cell sums.
class DiscreteGreen {
public:
    explicit DiscreteGreen(int n) : n_(n) {
        if (n < 2) throw DomainError("DiscreteGreen: n must be >= 2");
        omega_.resize(n_);
        for (int j = 1; j < n_; ++j) omega_[j] = mode_frequency(n_, j);
        phi_.assign(static_cast<std::size_t>(n_) * (n_ + 1), 0.0);
        for (int j = 1; j < n_; ++j)
            for (int k = 0; k <= n_; ++k)
                phi_at(j, k) = sine_node(j, k, n_);
    }

    int n() const { return n_; }
    double omega(int j) const { return omega_[j]; }

    // nodal phi_j interpolated to arbitrary x
    double phi_lin(int j, double x) const {
        int k = kappa_index(n_, x);
        if (k >= n_) return 0.0;
        double frac = x * n_ - k;
        if (frac < 0.0) frac = 0.0;
        if (frac > 1.0) frac = 1.0;
        return phi_at(j, k) + frac * (phi_at(j, k + 1) - phi_at(j, k));
    }

    double value(double t, double x, double y) const {
        int ky = kappa_index(n_, y);
        if (ky >= n_) return 0.0;
        double s = 0.0;
        for (int j = 1; j < n_; ++j)
            s += std::sin(omega_[j] * t) / omega_[j] * phi_lin(j, x) * phi_at(j, ky);
        return s;
    }

    double dt_value(double t, double x, double y) const {
        int ky = kappa_index(n_, y);
        if (ky >= n_) return 0.0;
        double s = 0.0;
        for (int j = 1; j < n_; ++j)
            s += std::cos(omega_[j] * t) * phi_lin(j, x) * phi_at(j, ky);
        return s;
    }

    double dtt_value(double t, double x, double y) const {
        int ky = kappa_index(n_, y);
        if (ky >= n_) return 0.0;
        double s = 0.0;
        for (int j = 1; j < n_; ++j)
            s += -omega_[j] * std::sin(omega_[j] * t) * phi_lin(j, x) * phi_at(j, ky);
        return s;
    }

    // discrete sine coefficient (1/n) sum_k phi_j(k/n) g(k/n)
    double mode_coefficient(int j, const NodalVector& g) const {
        double s = 0.0;
        for (int k = 1; k < n_; ++k) s += phi_at(j, k) * g[k];
        return s / n_;
    }

    // integral of Gn_t(x, z) g(kappa_n(z)) dz, exact
    double apply_nodal(double t, double x, const NodalVector& g) const {
        double s = 0.0;
        for (int j = 1; j < n_; ++j)
            s += std::sin(omega_[j] * t) / omega_[j] * phi_lin(j, x) * mode_coefficient(j, g);
        return s;
    }

    // integral of d/dt Gn_t(x, z) g(kappa_n(z)) dz; at t = 0 this reproduces
    // the polygonal interpolation of g.
    double apply_dt_nodal(double t, double x, const NodalVector& g) const {
        double s = 0.0;
        for (int j = 1; j < n_; ++j)
            s += std::cos(omega_[j] * t) * phi_lin(j, x) * mode_coefficient(j, g);
        return s;
    }

    // homogeneous part of the discrete flow: the two initial-data terms
    double initial_terms(const ProblemSpec& spec, double t, double x) const {
        NodalVector u0 = NodalVector::sample(n_, [&](double z) { return spec.u0.eval(z); });
        NodalVector v0 = NodalVector::sample(n_, [&](double z) { return spec.v0.eval(z); });
        return apply_nodal(t, x, v0) + apply_dt_nodal(t, x, u0);
    }

    // integral over z of Gn_t(x,z)^2, by Parseval over the cell-constant basis
    double l2_slice(double t, double x) const {
        double s = 0.0;
        for (int j = 1; j < n_; ++j) {
            double w = std::sin(omega_[j] * t) / omega_[j] * phi_lin(j, x);
            s += w * w;
        }
        return s;
    }

    // integral over (s,z) in [0,T]x[0,1] of Gn_s(x,z)^2, closed form per mode:
    // int_0^T sin^2(w s) ds = T/2 - sin(2 w T) / (4 w).
    double squared_kernel_integral(double T, double x) const {
        double s = 0.0;
        for (int j = 1; j < n_; ++j) {
            double w = omega_[j];
            double p = phi_lin(j, x);
            s += p * p / (w * w) * (0.5 * T - std::sin(2.0 * w * T) / (4.0 * w));
        }
        return s;
    }

private:
    int n_;
    std::vector<double> omega_;
    std::vector<double> phi_; // row j, column k

    double& phi_at(int j, int k) { return phi_[static_cast<std::size_t>(j) * (n_ + 1) + k]; }
    double phi_at(int j, int k) const { return phi_[static_cast<std::size_t>(j) * (n_ + 1) + k]; }
};

// Truncated continuous kernel G_t(x,y) = sum_j sin(j pi t)/(j pi) phi_j(x) phi_j(y).
// Production code only applies it through sine coefficients, where the tail is
// controlled by sum |g_j| / j; raw pointwise sums oscillate and are kept for
// diagnostics only (Fejer smoothed).
class GreenSeries {
public:
    explicit GreenSeries(int j_max) : j_max_(j_max) {
        if (j_max < 1) throw DomainError("GreenSeries: j_max must be >= 1");
    }

    int j_max() const { return j_max_; }

    double apply(double t, double x, const std::vector<double>& coeffs) const {
        int J = std::min<int>(j_max_, static_cast<int>(coeffs.size()) - 1);
        double s = 0.0;
        for (int j = 1; j <= J; ++j)
            s += std::sin(j * kPi * t) / (j * kPi) * sine_basis(j, x) * coeffs[j];
        return s;
    }

    double apply_dt(double t, double x, const std::vector<double>& coeffs) const {
        int J = std::min<int>(j_max_, static_cast<int>(coeffs.size()) - 1);
        double s = 0.0;
        for (int j = 1; j <= J; ++j)
            s += std::cos(j * kPi * t) * sine_basis(j, x) * coeffs[j];
        return s;
    }

    // Cesaro-smoothed pointwise value, diagnostics only
    double fejer_value(double t, double x, double y) const {
        double s = 0.0;
        for (int j = 1; j <= j_max_; ++j) {
            double w = 1.0 - static_cast<double>(j) / (j_max_ + 1);
            s += w * std::sin(j * kPi * t) / (j * kPi) * sine_basis(j, x) * sine_basis(j, y);
        }
        return s;
    }

    double l2_slice(double t, double x) const {
        double s = 0.0;
        for (int j = 1; j <= j_max_; ++j) {
            double w = std::sin(j * kPi * t) / (j * kPi) * sine_basis(j, x);
            s += w * w;
        }
        return s;
    }

    double squared_kernel_integral(double T, double x) const {
        double s = 0.0;
        for (int j = 1; j <= j_max_; ++j) {
            double w = j * kPi;
            double p = sine_basis(j, x);
            s += p * p / (w * w) * (0.5 * T - std::sin(2.0 * w * T) / (4.0 * w));
        }
        return s;
    }

    // crude tail bound for the squared-kernel integral beyond j_max
    double squared_kernel_tail(double T) const {
        // sum_{j>J} 2 T/2 / (j pi)^2 <= T / (pi^2 (J)) roughly
        return T / (kPi * kPi * j_max_);
    }

private:
    int j_max_;
};

// Sine coefficients g_j = int_0^1 g(x) phi_j(x) dx by composite Simpson with
// panels proportional to the truncation order, so quadrature error stays
// below the series tail.
inline std::vector<double> sine_coefficients(const std::function<double(double)>& g, int j_max,
                                             int panels_per_mode = 8) {
    int panels = panels_per_mode * j_max;
    if (panels % 2 == 1) ++panels;
    std::vector<double> coeffs(static_cast<std::size_t>(j_max) + 1, 0.0);
    double h = 1.0 / panels;
    std::vector<double> gv(static_cast<std::size_t>(panels) + 1);
    for (int i = 0; i <= panels; ++i) gv[i] = g(i * h);
    for (int j = 1; j <= j_max; ++j) {
        double s = 0.0;
        for (int i = 0; i <= panels; ++i) {
            double wgt = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            s += wgt * gv[i] * sine_basis(j, i * h);
        }
        coeffs[j] = s * h / 3.0;
    }
    return coeffs;
}

struct BoundRow {
    std::string name;
    int n = 0; // 0 marks the continuous kernel
    double estimate = 0.0;
    int samples = 0;
};

struct BoundReport {
    std::vector<BoundRow> rows;
};

// Sampled versions of the kernel estimates: sup |G| (smoothed), the squared
// L2 Holder ratios in x and t, and the plain L2 bound for the discrete kernel.
// Distinct-pair sampling only; all reported constants must come out finite.
inline BoundReport check_green_bounds(const DiscreteGreen& dg, double T, int budget,
                                      std::uint64_t seed = 11) {
    if (budget < 100) throw DomainError("check_green_bounds: budget must be >= 100");
    Rng rng(seed, 0);
    double l2max = 0.0, hx = 0.0, ht = 0.0;
    for (int it = 0; it < budget; ++it) {
        double t = rng.uniform(0.0, T);
        double s = rng.uniform(0.0, T);
        double x = rng.uniform();
        double y = rng.uniform();
        l2max = std::max(l2max, dg.l2_slice(t, x));
        if (std::fabs(x - y) > 1e-9) {
            double acc = 0.0;
            for (int j = 1; j < dg.n(); ++j) {
                double w = std::sin(dg.omega(j) * t) / dg.omega(j);
                double d = dg.phi_lin(j, x) - dg.phi_lin(j, y);
                acc += w * w * d * d;
            }
            hx = std::max(hx, acc / std::fabs(x - y));
        }
        if (std::fabs(t - s) > 1e-9) {
            double acc = 0.0;
            for (int j = 1; j < dg.n(); ++j) {
                double w = (std::sin(dg.omega(j) * t) - std::sin(dg.omega(j) * s)) / dg.omega(j);
                double p = dg.phi_lin(j, x);
                acc += w * w * p * p;
            }
            ht = std::max(ht, acc / std::fabs(t - s));
        }
    }
    BoundReport rep;
    rep.rows.push_back({"discrete_l2", dg.n(), l2max, budget});
    rep.rows.push_back({"discrete_holder_x", dg.n(), hx, budget});
    rep.rows.push_back({"discrete_holder_t", dg.n(), ht, budget});
    return rep;
}

inline BoundReport check_green_bounds(const GreenSeries& gs, double T, int budget,
                                      std::uint64_t seed = 11) {
    if (budget < 100) throw DomainError("check_green_bounds: budget must be >= 100");
    Rng rng(seed, 0);
    double supg = 0.0, hx = 0.0, ht = 0.0;
    for (int it = 0; it < budget; ++it) {
        double t = rng.uniform(0.0, T);
        double s = rng.uniform(0.0, T);
        double x = rng.uniform();
        double y = rng.uniform();
        supg = std::max(supg, std::fabs(gs.fejer_value(t, x, y)));
        if (std::fabs(x - y) > 1e-9) {
            double acc = 0.0;
            for (int j = 1; j <= gs.j_max(); ++j) {
                double w = std::sin(j * kPi * t) / (j * kPi);
                double d = sine_basis(j, x) - sine_basis(j, y);
                acc += w * w * d * d;
            }
            hx = std::max(hx, acc / std::fabs(x - y));
        }
        if (std::fabs(t - s) > 1e-9) {
            double acc = 0.0;
            for (int j = 1; j <= gs.j_max(); ++j) {
                double w = (std::sin(j * kPi * t) - std::sin(j * kPi * s)) / (j * kPi);
                double p = sine_basis(j, x);
                acc += w * w * p * p;
            }
            ht = std::max(ht, acc / std::fabs(t - s));
        }
    }
    BoundReport rep;
    rep.rows.push_back({"continuous_sup_fejer", 0, supg, budget});
    rep.rows.push_back({"continuous_holder_x", 0, hx, budget});
    rep.rows.push_back({"continuous_holder_t", 0, ht, budget});
    return rep;
}

} // namespace waverate
