// Acceptance suite: one criterion per invocation (--criterion N), one
// PASS/FAIL line each, nonzero exit on failure. Tolerances are pinned here.

#include "waverate/csv.hpp"
#include "waverate/inverse.hpp"
#include "waverate/mc.hpp"
#include "waverate/rate.hpp"
#include "waverate/skeleton.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

using namespace waverate;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

bool finish(int crit, bool ok, const Timer& timer, double budget_s, const char* what) {
    double secs = timer.seconds();
    bool in_budget = secs < budget_s;
    std::printf("[c%d] %s %s (%.1f s, budget %.0f s)\n", crit,
                ok && in_budget ? "PASS" : "FAIL", what, secs, budget_s);
    return ok && in_budget;
}

// 1. machine-precision identities of the mesh calculus
bool criterion1() {
    Timer timer;
    double worst = 0.0;
    Rng rng(4771, 0);
    for (int n : {2, 4, 8, 16, 32}) {
        worst = std::max(worst, eigenrelation_defect(n));
        worst = std::max(worst, orthonormality_defect(n));
        DiscreteGreen dg(n);
        for (int trial = 0; trial < 100; ++trial) {
            NodalVector u(n), v(n);
            for (int k = 1; k < n; ++k) {
                u[k] = rng.uniform(-1.0, 1.0);
                v[k] = rng.uniform(-1.0, 1.0);
            }
            worst = std::max(worst, ibp_defect(u, v));
            double x = rng.uniform();
            worst = std::max(worst,
                             std::fabs(dg.apply_dt_nodal(0.0, x, u) - PiecewiseLinearFn(u)(x)));
        }
    }
    std::printf("  max identity defect: %.3e (tolerance 1e-10)\n", worst);
    return finish(1, worst <= 1e-10, timer, 5.0,
                  "exact identities: eigenrelation, summation by parts, orthonormality, "
                  "t=0 kernel interpolation");
}

// 2. two independent solver routes agree
bool criterion2() {
    Timer timer;
    double worst = 0.0;
    for (const char* name : {"LINEAR", "NONLIN-A", "NONLIN-B"}) {
        ProblemSpec spec = ProblemSpec::preset(name);
        BallSampler sampler(1.0, 8211);
        for (int idx = 0; idx < 20; ++idx) {
            Control h = sampler.sample(8, 256, spec.T, idx);
            DiscretePath a = upsilon_n(spec, h);
            DiscretePath b = upsilon_n_mild(spec, h, 1e-10);
            double diff = 0.0;
            for (int i = 0; i <= h.m; ++i)
                for (int k = 0; k <= h.n; ++k)
                    diff = std::max(diff, std::fabs(a.pos(i, k) - b.pos(i, k)));
            worst = std::max(worst, diff);
        }
    }
    std::printf("  max stepper-vs-mild sup discrepancy: %.3e (tolerance 1e-3)\n", worst);
    return finish(2, worst <= 1e-3, timer, 120.0,
                  "solver cross-validation on all presets, 20 controls each");
}

// 3. closed-form inversion round trip, improving under time refinement
bool criterion3() {
    Timer timer;
    bool ok = true;
    for (const char* name : {"LINEAR", "NONLIN-A", "NONLIN-B"}) {
        ProblemSpec spec = ProblemSpec::preset(name);
        BallSampler sampler(1.0, 355);
        double worst512 = 0.0, worst1024 = 0.0;
        for (int idx = 0; idx < 20; ++idx) {
            Control h = sampler.sample(8, 512, spec.T, idx);
            worst512 = std::max(worst512,
                                invert_upsilon_n(spec, upsilon_n(spec, h)).distance_l2(h));
            Control h2 = h.refined(8, 1024);
            worst1024 = std::max(
                worst1024, invert_upsilon_n(spec, upsilon_n(spec, h2)).distance_l2(h2));
        }
        double order = std::log2(worst512 / worst1024);
        std::printf("  %s: err(m=512)=%.3e err(m=1024)=%.3e observed order %.2f\n", name,
                    worst512, worst1024, order);
        ok = ok && worst512 <= 1e-2 && order >= 1.0;
    }
    return finish(3, ok, timer, 180.0,
                  "round-trip inversion at n=8, tolerance 1e-2, order >= 1 in m");
}

// 4. decay of the solver against its fine-grid reference
bool criterion4() {
    Timer timer;
    bool ok = true;
    std::vector<int> ns{4, 8, 16, 32};
    for (const char* name : {"LINEAR", "NONLIN-A"}) {
        ProblemSpec spec = ProblemSpec::preset(name);
        BallSampler sampler(1.0, 9404);
        double min_order = 1e9;
        for (int idx = 0; idx < 5; ++idx) {
            Control h = sampler.sample(4, 16, 1.0, idx);
            ErrorCurve c = sup_error_curve(spec, h, ns, 128);
            min_order = std::min(min_order, c.fitted_order);
        }
        std::printf("  %s: min fitted order %.3f (threshold 0.25)\n", name, min_order);
        ok = ok && min_order >= 0.25;
    }
    return finish(4, ok, timer, 300.0,
                  "solution-map convergence rate against n_ref=128, 5 controls per preset");
}

// 5. uniform boundedness, Holder equicontinuity, control sensitivity
bool criterion5() {
    Timer timer;
    bool ok = true;
    std::vector<int> ns{4, 8, 16, 32};
    for (const char* name : {"LINEAR", "NONLIN-A", "NONLIN-B"}) {
        ProblemSpec spec = ProblemSpec::preset(name);
        SuiteReport bounded = uniform_boundedness_suite(spec, ns, {1.0, 2.0}, 50, 101);
        SuiteReport holder = holder_suite(spec, ns, 1.0, 5, 10000, 202);
        SuiteReport lip = lipschitz_in_control_suite(spec, ns, 2.0, 10, 303);
        std::printf("  %s: bound const %.3f  holder const %.3f  lipschitz const %.3f  "
                    "stable(2x)=%d/%d/%d\n",
                    name, bounded.overall, holder.overall, lip.overall,
                    (int)bounded.stable(2.0), (int)holder.stable(2.0), (int)lip.stable(2.0));
        ok = ok && bounded.stable(2.0) && holder.stable(2.0) && lip.stable(2.0);
    }
    return finish(5, ok, timer, 300.0,
                  "boundedness / Holder / control-Lipschitz constants stable across n");
}

// 6. optimizer against the linear closed form
bool criterion6() {
    Timer timer;
    bool ok = true;
    ProblemSpec lin = ProblemSpec::preset("LINEAR");
    double worst_rel = 0.0;
    for (int n : {8, 16, 32}) {
        DiscreteGreen dg(n);
        double mu = dg.initial_terms(lin, lin.T, lin.x0);
        for (double off : {0.25, -0.25, 0.5, -0.5, 1.0, -1.0}) {
            double oracle = rate_linear_oracle(lin, n, mu + off);
            RateResult r = rate_discrete(lin, n, mu + off);
            worst_rel = std::max(worst_rel, std::fabs(r.value - oracle) / oracle);
        }
        DiscretePath f0 = upsilon_n_zero(lin, n, rate_default_steps(n, lin.T));
        RateResult r0 = rate_discrete(lin, n, f0.terminal(lin.x0));
        ok = ok && r0.value <= 1e-10;
    }
    std::printf("  worst relative deviation from the closed form: %.3e (tolerance 1e-2)\n",
                worst_rel);
    return finish(6, ok && worst_rel <= 1e-2, timer, 300.0,
                  "linear-preset rate function vs closed form; zero at the noiseless point");
}

// 7. pointwise convergence of the rate function in the resolution
bool criterion7() {
    Timer timer;
    bool ok = true;
    OptimizerOptions opt;
    opt.multistart = 4;

    ProblemSpec lin = ProblemSpec::preset("LINEAR");
    double y_lin = -1.0 + 0.5; // continuum noiseless terminal is -1
    double oracle = rate_linear_oracle(lin, 0, y_lin, 4096);
    RateResult lin32 = rate_discrete(lin, 32, y_lin, opt);
    double rel = std::fabs(lin32.value - oracle) / oracle;
    std::printf("  LINEAR: I^32=%.6f continuum oracle=%.6f rel gap %.3f%% (tolerance 2%%)\n",
                lin32.value, oracle, 100.0 * rel);
    ok = ok && rel <= 0.02;

    ProblemSpec spec = ProblemSpec::preset("NONLIN-A");
    int n_ref = 64;
    DiscretePath f0 = upsilon_n_zero(spec, n_ref, rate_default_steps(n_ref, spec.T));
    double y = f0.terminal(spec.x0) + 0.5;
    RateResult ref = rate_discrete(spec, n_ref, y, opt);
    double prev_gap = 1e300;
    double final_gap = 0.0;
    double hol_min = 1e300, hol_max = 0.0;
    for (int n : {4, 8, 16, 32}) {
        RateResult r = rate_discrete(spec, n, y, opt);
        double gap = std::fabs(r.value - ref.value);
        std::printf("  NONLIN-A: n=%2d I^n=%.6f |gap to I^64|=%.3e decreasing=%d\n", n, r.value,
                    gap, (int)(gap < prev_gap));
        ok = ok && gap < prev_gap;
        prev_gap = gap;
        final_gap = gap;
        hol_min = std::min(hol_min, r.holder_seminorm);
        hol_max = std::max(hol_max, r.holder_seminorm);
    }
    std::printf("  NONLIN-A: final gap %.3f%% of I^64 (tolerance 5%%); holder band "
                "[%.3f, %.3f]\n",
                100.0 * final_gap / ref.value, hol_min, hol_max);
    ok = ok && final_gap <= 0.05 * ref.value && hol_max <= 2.0 * hol_min;
    return finish(7, ok, timer, 1800.0,
                  "rate-function convergence: linear vs continuum, nonlinear vs n_ref=64");
}

// 8. adjoint gradient against central differences
bool criterion8() {
    Timer timer;
    bool ok = true;
    double worst = 0.0;
    for (const char* name : {"LINEAR", "NONLIN-A"}) {
        ProblemSpec spec = ProblemSpec::preset(name);
        int n = 8, m = 64;
        BallSampler sampler(1.0, 77);
        Control h = sampler.sample(n, m, spec.T, 4);
        DiscretePath path = upsilon_n(spec, h);
        Control g = constraint_gradient(spec, h, path, spec.x0);
        Rng rng(4141, 0);
        for (int trial = 0; trial < 10; ++trial) {
            int i = static_cast<int>(rng.next_u64() % m);
            int k = 1 + static_cast<int>(rng.next_u64() % (n - 1));
            double delta = 1e-5 * std::max(1.0, std::fabs(h.at(i, k)));
            Control hp = h, hm = h;
            hp.at(i, k) += delta;
            hm.at(i, k) -= delta;
            double fd = (upsilon_n(spec, hp).terminal(spec.x0) -
                         upsilon_n(spec, hm).terminal(spec.x0)) /
                        (2.0 * delta);
            // the additive floor is the FD cancellation noise of O(1)
            // terminal values at step 1e-5; below it the difference quotient
            // carries no information about the derivative
            double err = std::fabs(fd - g.at(i, k));
            worst = std::max(worst, err / (std::fabs(fd) + 1e-6));
            ok = ok && err <= 1e-4 * std::fabs(fd) + 1e-10;
        }
    }
    std::printf("  worst adjoint-vs-FD relative error: %.3e (tolerance 1e-4 + noise floor)\n",
                worst);
    return finish(8, ok, timer, 60.0,
                  "adjoint gradient vs central differences, 10 coordinates per preset");
}

// 9. crude Monte Carlo decay slope against the rate value
bool criterion9() {
    Timer timer;
    ProblemSpec lin = ProblemSpec::preset("LINEAR");
    int n = 8, m_mc = 64;
    DiscreteGreen dg(n);
    double mun = dg.initial_terms(lin, lin.T, lin.x0);
    double Vn = dg.squared_kernel_integral(lin.T, lin.x0);
    double y = mun + 0.5;
    double In = rate_discrete(lin, n, y).value;
    std::printf("  I^8(mu+0.5) = %.6f, terminal sd at eps is sqrt(eps * %.6f)\n", In, Vn);

    bool slope_ok = true;
    double prev_gap = 1e300;
    double final_v = 0.0;
    for (double eps : {0.1, 0.05, 0.025}) {
        RareEventEstimate est =
            estimate_rare(lin, n, m_mc, eps, RareEvent{y, true}, 100000, 424242);
        double oracle_p = normal_tail((y - mun) / std::sqrt(eps * Vn));
        double v = est.eps_log();
        std::printf("  eps=%.3f hits=%ld phat=%.3e (gaussian oracle %.3e) -eps*log(phat)=%s\n",
                    eps, est.hits, est.phat, oracle_p,
                    est.zero_hits ? "inf (zero hits)" : format_real(v).c_str());
        if (est.zero_hits || !(std::fabs(v - In) < prev_gap)) slope_ok = false;
        if (!est.zero_hits) {
            prev_gap = std::fabs(v - In);
            final_v = v;
        }
    }
    bool final_ok = slope_ok && std::fabs(final_v - In) <= 0.25 * In;
    if (!final_ok)
        std::printf("  slope criterion unattainable by crude sampling at M=1e5: the target "
                    "probabilities sit 5 to 14 orders below 1/M\n");

    std::vector<double> vals(10000);
    for (int s = 0; s < 10000; ++s) {
        NoisePlan plan{909090, n, m_mc, lin.T, static_cast<std::uint64_t>(s), false};
        vals[s] = simulate_terminal(lin, n, m_mc, 0.1, plan);
    }
    double D = ks_statistic(vals,
                            [&](double x) { return normal_cdf(x, mun, std::sqrt(0.1 * Vn)); });
    bool ks_ok = D < ks_critical(0.01, vals.size());
    std::printf("  KS statistic %.5f vs 1%% critical %.5f: %s\n", D,
                ks_critical(0.01, vals.size()), ks_ok ? "not rejected" : "rejected");
    return finish(9, final_ok && ks_ok, timer, 600.0,
                  "Monte Carlo decay slope toward the rate value; gaussian KS");
}

// 10. byte-identical outputs across reruns and worker counts
bool criterion10() {
    Timer timer;
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "waverate_acceptance_c10";
    fs::create_directories(dir);
    const std::string bin = WAVERATE_BIN;
    auto run = [&](const std::string& args) {
        std::string cmd = bin + " " + args + " >/dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    bool ok = true;
    struct Case {
        const char* name;
        std::string args;
    };
    std::vector<Case> cases = {
        {"mc", "mc --preset LINEAR --n 4 --eps 0.2,0.1 --y-offset 0.25 --samples 4000 --seed 7"},
        {"converge", "converge --preset LINEAR --y-offsets 0.5 --ns 4,8 --nref 16 --seed 3"},
        {"rate", "rate --preset NONLIN-A --y-offset 0.3 --n 8 --seed 11"},
        {"check-green", "check-green --ns 4,8 --budget 500 --seed 2"},
    };
    for (const auto& c : cases) {
        std::vector<std::uint64_t> digests;
        int variant = 0;
        for (const char* threads : {"1", "1", "3"}) {
            std::string out =
                (dir / (std::string(c.name) + "_" + std::to_string(variant++) + ".csv")).string();
            int code = run(c.args + " --threads " + threads + " --out " + out);
            if (code != 0) {
                ok = false;
                std::printf("  %s: exit code %d\n", c.name, code);
                break;
            }
            digests.push_back(fnv1a_file(out));
        }
        bool same = digests.size() == 3 && digests[0] == digests[1] && digests[0] == digests[2];
        std::printf("  %s: digests %s\n", c.name, same ? "identical" : "DIFFER");
        ok = ok && same;
    }
    return finish(10, ok, timer, 600.0,
                  "deterministic CSV bytes across reruns and worker counts");
}

} // namespace

int main(int argc, char** argv) {
    int which = 0;
    for (int i = 1; i < argc - 1; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0) which = std::atoi(argv[i + 1]);
    bool ok = true;
    switch (which) {
        case 1: ok = criterion1(); break;
        case 2: ok = criterion2(); break;
        case 3: ok = criterion3(); break;
        case 4: ok = criterion4(); break;
        case 5: ok = criterion5(); break;
        case 6: ok = criterion6(); break;
        case 7: ok = criterion7(); break;
        case 8: ok = criterion8(); break;
        case 9: ok = criterion9(); break;
        case 10: ok = criterion10(); break;
        case 0: {
            ok = criterion1();
            ok = criterion2() && ok;
            ok = criterion3() && ok;
            ok = criterion4() && ok;
            ok = criterion5() && ok;
            ok = criterion6() && ok;
            ok = criterion7() && ok;
            ok = criterion8() && ok;
            ok = criterion9() && ok;
            ok = criterion10() && ok;
            break;
        }
        default:
            std::fprintf(stderr, "unknown criterion %d\n", which);
            return 2;
    }
    return ok ? 0 : 1;
}
