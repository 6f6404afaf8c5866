// waverate: one-point large-deviations rate functions of the semidiscrete
// stochastic wave equation. Single binary, batch subcommands, CSV output.

#include "waverate/csv.hpp"
#include "waverate/green.hpp"
#include "waverate/inverse.hpp"
#include "waverate/mc.hpp"
#include "waverate/parallel.hpp"
#include "waverate/rate.hpp"
#include "waverate/skeleton.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace waverate;

struct ProblemArgs {
    std::string preset;
    std::string config_path;

    void attach(CLI::App* cmd) {
        auto* p = cmd->add_option("--preset", preset, "built-in problem (LINEAR, NONLIN-A, NONLIN-B)");
        auto* c = cmd->add_option("--problem", config_path, "problem config file");
        p->excludes(c);
    }

    ProblemSpec resolve() const {
        if (!config_path.empty()) return ProblemSpec::from_config_file(config_path);
        return ProblemSpec::preset(preset.empty() ? "LINEAR" : preset);
    }
};

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (double v : parse_list(csv)) out.push_back(static_cast<int>(v));
    return out;
}

struct ManifestCell {
    std::string params;
    std::string file;
    std::uint64_t digest;
    double seconds;
};

void write_manifest(const std::string& out_path, const std::vector<ManifestCell>& cells) {
    nlohmann::json j;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : cells) {
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(c.digest));
        j["cells"].push_back({{"params", c.params},
                              {"file", c.file},
                              {"digest", hex},
                              {"seconds", c.seconds}});
    }
    std::ofstream f(out_path + ".manifest.json", std::ios::binary);
    f << j.dump(2) << '\n';
}

double resolve_y(const ProblemSpec& spec, int n, std::optional<double> y,
                 std::optional<double> y_offset, int m) {
    if (y) return *y;
    DiscretePath f0 = upsilon_n_zero(spec, n, m);
    double mu = f0.terminal(spec.x0);
    return mu + (y_offset ? *y_offset : 0.0);
}

int cmd_selftest() {
    double worst = 0.0;
    for (int n : {2, 4, 8, 16, 32}) {
        worst = std::max(worst, eigenrelation_defect(n));
        worst = std::max(worst, orthonormality_defect(n));
        Rng rng(99, n);
        for (int trial = 0; trial < 10; ++trial) {
            NodalVector u(n), v(n);
            for (int k = 1; k < n; ++k) {
                u[k] = rng.uniform(-1.0, 1.0);
                v[k] = rng.uniform(-1.0, 1.0);
            }
            worst = std::max(worst, ibp_defect(u, v));
            DiscreteGreen dg(n);
            for (int k = 0; k <= 4; ++k) {
                double x = static_cast<double>(k) / 4.0;
                double lhs = dg.apply_dt_nodal(0.0, x, u);
                double rhs = PiecewiseLinearFn(u)(x);
                worst = std::max(worst, std::fabs(lhs - rhs));
            }
        }
    }
    std::printf("identities: max defect %.3e (budget 1e-10)\n", worst);
    bool ok = worst <= 1e-10;

    // tiny round trip
    ProblemSpec spec = ProblemSpec::preset("NONLIN-A");
    BallSampler sampler(1.0, 2024);
    Control h = sampler.sample(4, 64, spec.T, 0);
    DiscretePath f = upsilon_n(spec, h);
    Control hrec = invert_upsilon_n(spec, f);
    double err = hrec.distance_l2(h);
    std::printf("round trip at n=4: |h_rec - h|_L2 = %.3e (budget 5e-2)\n", err);
    ok = ok && err <= 5e-2;

    std::printf("selftest: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

int cmd_check_green(const std::string& ns_csv, int jmax, int budget, std::uint64_t seed,
                    const std::string& out) {
    Table t;
    t.header = {"bound_name", "n", "estimate", "samples"};
    for (int n : parse_int_list(ns_csv)) {
        BoundReport rep = check_green_bounds(DiscreteGreen(n), 1.0, budget, seed);
        for (const auto& row : rep.rows)
            t.add_row({row.name, static_cast<long>(row.n), row.estimate,
                       static_cast<long>(row.samples)});
    }
    BoundReport rep = check_green_bounds(GreenSeries(jmax), 1.0, budget, seed);
    for (const auto& row : rep.rows)
        t.add_row({row.name, static_cast<long>(row.n), row.estimate,
                   static_cast<long>(row.samples)});
    write_table(t, out);
    write_manifest(out, {{"check-green", out, fnv1a_file(out), 0.0}});
    return 0;
}

int cmd_skeleton(const ProblemArgs& pa, int n, int m, const std::string& control_path,
                 const std::string& out) {
    ProblemSpec spec = pa.resolve();
    Control h = control_path.empty() ? Control::zeros(n, m, spec.T) : load_control(control_path);
    DiscretePath f = upsilon_n(spec, h);
    write_table(path_table(f), out);
    write_manifest(out, {{"skeleton", out, fnv1a_file(out), 0.0}});
    return 0;
}

int cmd_invert(const ProblemArgs& pa, const std::string& path_csv, const std::string& out) {
    ProblemSpec spec = pa.resolve();
    DiscretePath f = load_path_csv(path_csv);
    // the t,x,f format carries no derivatives; interior velocities are
    // re-differenced on load, and the initial level is pinned to the nodal
    // initial-velocity samples the path class prescribes
    for (int k = 1; k < f.n(); ++k)
        f.vel(0, k) = spec.v0.eval(static_cast<double>(k) / f.n());
    Control h = invert_upsilon_n(spec, f, kSigmaFloor, 1e-4);
    save_control(h, out);
    return 0;
}

int cmd_rate(const ProblemArgs& pa, int n, int m, std::optional<double> y,
             std::optional<double> y_offset, int multistart, std::uint64_t seed,
             const std::string& out) {
    ProblemSpec spec = pa.resolve();
    OptimizerOptions opt;
    opt.m = m;
    opt.multistart = multistart;
    opt.seed = seed;
    int m_eff = m > 0 ? m : rate_default_steps(n, spec.T);
    double target = resolve_y(spec, n, y, y_offset, m_eff);
    auto t0 = std::chrono::steady_clock::now();
    RateResult r = rate_discrete(spec, n, target, opt);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Table t;
    t.header = {"y", "n", "m", "value", "constraint_residual_prefix_modification",
                "iterations", "feasibility_method", "holder_seminorm"};
    t.add_row({r.y, static_cast<long>(r.n), static_cast<long>(r.m), r.value,
               r.residual_before_modification, static_cast<long>(r.iterations),
               r.feasibility_method, r.holder_seminorm});
    write_table(t, out);
    write_manifest(out, {{"rate", out, fnv1a_file(out), secs}});
    return r.converged ? 0 : 1;
}

int cmd_converge(const ProblemArgs& pa, const std::string& ys_csv,
                 const std::string& y_offsets_csv, const std::string& ns_csv, int n_ref,
                 int multistart, std::uint64_t seed, int threads, const std::string& out) {
    ProblemSpec spec = pa.resolve();
    std::vector<int> ns = parse_int_list(ns_csv);
    OptimizerOptions opt;
    opt.multistart = multistart;
    opt.seed = seed;
    std::vector<double> ys;
    if (!ys_csv.empty()) {
        ys = parse_list(ys_csv);
    } else {
        DiscretePath f0 = upsilon_n_zero(spec, n_ref, rate_default_steps(n_ref, spec.T));
        double mu = f0.terminal(spec.x0);
        for (double off : parse_list(y_offsets_csv)) ys.push_back(mu + off);
    }
    auto t0 = std::chrono::steady_clock::now();

    struct CellOut {
        StudyRow row;
    };
    std::vector<RateResult> refs(ys.size());
    parallel_for(static_cast<int>(ys.size()), threads,
                 [&](int i) { refs[i] = rate_reference(spec, ys[i], n_ref, opt); });
    std::vector<StudyRow> rows(ys.size() * ns.size());
    parallel_for(static_cast<int>(rows.size()), threads, [&](int cell) {
        std::size_t yi = static_cast<std::size_t>(cell) / ns.size();
        int n = ns[static_cast<std::size_t>(cell) % ns.size()];
        RateResult r = rate_discrete(spec, n, ys[yi], opt);
        StudyRow row;
        row.y = ys[yi];
        row.n = n;
        row.m = r.m;
        row.value = r.value;
        row.ref_value = refs[yi].value;
        row.gap = std::fabs(r.value - refs[yi].value);
        row.residual = r.residual_before_modification;
        row.iterations = r.iterations;
        row.feasibility_method = r.feasibility_method;
        row.holder_seminorm = r.holder_seminorm;
        row.converged = r.converged;
        rows[static_cast<std::size_t>(cell)] = row;
    });
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Table t;
    t.header = {"y", "n", "m", "value", "ref_value", "gap",
                "constraint_residual_prefix_modification", "iterations",
                "feasibility_method", "holder_seminorm"};
    for (const auto& row : rows)
        t.add_row({row.y, static_cast<long>(row.n), static_cast<long>(row.m), row.value,
                   row.ref_value, row.gap, row.residual, static_cast<long>(row.iterations),
                   row.feasibility_method, row.holder_seminorm});
    write_table(t, out);
    write_manifest(out, {{"converge", out, fnv1a_file(out), secs}});
    return 0;
}

int cmd_mc(const ProblemArgs& pa, int n, int mmc, const std::string& eps_csv,
           std::optional<double> y, std::optional<double> y_offset, const std::string& side,
           long samples, std::uint64_t seed, int threads, const std::string& out) {
    ProblemSpec spec = pa.resolve();
    int m_mc = mmc > 0 ? mmc : SpaceTimeGrid::default_steps(n, spec.T, 0.5, 4);
    double target = resolve_y(spec, n, y, y_offset, m_mc);
    std::vector<double> eps = parse_list(eps_csv);
    bool upper = side != "le";
    auto t0 = std::chrono::steady_clock::now();
    Table t;
    t.header = {"eps", "samples", "hits", "phat", "lo", "hi", "eps_log"};
    for (std::size_t i = 0; i < eps.size(); ++i) {
        RareEventEstimate est = estimate_rare(spec, n, m_mc, eps[i], RareEvent{target, upper},
                                              samples, seed + i, threads);
        t.add_row({est.eps, est.samples, est.hits, est.phat, est.lo, est.hi, est.eps_log()});
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_table(t, out);
    write_manifest(out, {{"mc", out, fnv1a_file(out), secs}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-point large-deviations rate functions of the semidiscrete stochastic wave equation"};
    app.require_subcommand(1);
    int threads = waverate::default_thread_count();
    app.add_option("--threads", threads, "worker count (default: WAVERATE_THREADS or hardware)");

    auto* self = app.add_subcommand("selftest", "exact-identity and round-trip smoke suite")->fallthrough();
    (void)self;

    auto* cg = app.add_subcommand("check-green", "kernel bound estimates to CSV")->fallthrough();
    std::string cg_ns = "4,8,16,32", cg_out = "green.csv";
    int cg_jmax = 512, cg_budget = 2000;
    std::uint64_t cg_seed = 11;
    cg->add_option("--ns", cg_ns, "comma list of resolutions");
    cg->add_option("--jmax", cg_jmax, "continuous truncation order");
    cg->add_option("--budget", cg_budget, "samples per bound");
    cg->add_option("--seed", cg_seed, "rng seed");
    cg->add_option("--out", cg_out, "output CSV")->required();

    auto* sk = app.add_subcommand("skeleton", "solve the controlled node system")->fallthrough();
    ProblemArgs sk_pa;
    sk_pa.attach(sk);
    int sk_n = 8, sk_m = 0;
    std::string sk_control, sk_out = "skeleton.csv";
    sk->add_option("--n", sk_n, "spatial resolution");
    sk->add_option("--m", sk_m, "time steps (default: stability bound)");
    sk->add_option("--control", sk_control, "control file (header 'n m T', then m rows of n values)");
    sk->add_option("--out", sk_out, "output CSV (t,x,f)")->required();

    auto* iv = app.add_subcommand("invert", "recover the control of a path in closed form")->fallthrough();
    ProblemArgs iv_pa;
    iv_pa.attach(iv);
    std::string iv_path, iv_out;
    iv->add_option("--path", iv_path, "path CSV in the skeleton output format")->required();
    iv->add_option("--out", iv_out, "output control file")->required();

    auto* rt = app.add_subcommand("rate", "minimize the action under the terminal constraint")->fallthrough();
    ProblemArgs rt_pa;
    rt_pa.attach(rt);
    int rt_n = 8, rt_m = 0, rt_multistart = 0;
    std::uint64_t rt_seed = 1234;
    std::string rt_out = "rate.csv";
    std::optional<double> rt_y, rt_yoff;
    double rt_y_val = 0.0, rt_yoff_val = 0.0;
    auto* rt_yopt = rt->add_option("--y", rt_y_val, "terminal target");
    auto* rt_yoffopt = rt->add_option("--y-offset", rt_yoff_val, "target relative to the noiseless terminal value");
    rt_yopt->excludes(rt_yoffopt);
    rt->add_option("--n", rt_n, "spatial resolution");
    rt->add_option("--m", rt_m, "time cells of the control (default from n)");
    rt->add_option("--multistart", rt_multistart, "extra random starts");
    rt->add_option("--seed", rt_seed, "rng seed");
    rt->add_option("--out", rt_out, "output CSV")->required();

    auto* cv = app.add_subcommand("converge", "rate-function study across resolutions")->fallthrough();
    ProblemArgs cv_pa;
    cv_pa.attach(cv);
    std::string cv_ys, cv_yoffs, cv_ns = "4,8,16,32", cv_out = "converge.csv";
    int cv_nref = 64, cv_multistart = 0;
    std::uint64_t cv_seed = 1234;
    auto* cv_ysopt = cv->add_option("--ys", cv_ys, "comma list of absolute targets");
    auto* cv_yoffsopt = cv->add_option("--y-offsets", cv_yoffs,
                                       "targets relative to the reference noiseless terminal value");
    cv_ysopt->excludes(cv_yoffsopt);
    cv->add_option("--ns", cv_ns, "comma list of resolutions");
    cv->add_option("--nref", cv_nref, "reference resolution");
    cv->add_option("--multistart", cv_multistart, "extra random starts");
    cv->add_option("--seed", cv_seed, "rng seed");
    cv->add_option("--out", cv_out, "output CSV")->required();

    auto* mc = app.add_subcommand("mc", "rare-event Monte Carlo of the driven system")->fallthrough();
    ProblemArgs mc_pa;
    mc_pa.attach(mc);
    int mc_n = 8, mc_mmc = 0;
    std::string mc_eps = "0.1", mc_side = "ge", mc_out = "mc.csv";
    long mc_samples = 10000;
    std::uint64_t mc_seed = 1;
    std::optional<double> mc_y, mc_yoff;
    double mc_y_val = 0.0, mc_yoff_val = 0.0;
    auto* mc_yopt = mc->add_option("--y", mc_y_val, "event threshold");
    auto* mc_yoffopt = mc->add_option("--y-offset", mc_yoff_val, "threshold relative to the noiseless terminal value");
    mc_yopt->excludes(mc_yoffopt);
    mc->add_option("--n", mc_n, "spatial resolution");
    mc->add_option("--mmc", mc_mmc, "time steps (default: half the skeleton step)");
    mc->add_option("--eps", mc_eps, "comma list of noise intensities");
    mc->add_option("--side", mc_side, "event side: ge or le")->check(CLI::IsMember({"ge", "le"}));
    mc->add_option("--samples", mc_samples, "Monte Carlo samples per eps");
    mc->add_option("--seed", mc_seed, "rng seed");
    mc->add_option("--out", mc_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand("selftest")) return cmd_selftest();
        if (app.got_subcommand("check-green"))
            return cmd_check_green(cg_ns, cg_jmax, cg_budget, cg_seed, cg_out);
        if (app.got_subcommand("skeleton")) {
            int m = sk_m > 0 ? sk_m : waverate::SpaceTimeGrid::default_steps(sk_n, sk_pa.resolve().T);
            return cmd_skeleton(sk_pa, sk_n, m, sk_control, sk_out);
        }
        if (app.got_subcommand("invert")) return cmd_invert(iv_pa, iv_path, iv_out);
        if (app.got_subcommand("rate")) {
            if (rt_yopt->count()) rt_y = rt_y_val;
            if (rt_yoffopt->count()) rt_yoff = rt_yoff_val;
            return cmd_rate(rt_pa, rt_n, rt_m, rt_y, rt_yoff, rt_multistart, rt_seed, rt_out);
        }
        if (app.got_subcommand("converge"))
            return cmd_converge(cv_pa, cv_ys, cv_yoffs, cv_ns, cv_nref, cv_multistart, cv_seed,
                                threads, cv_out);
        if (app.got_subcommand("mc")) {
            if (mc_yopt->count()) mc_y = mc_y_val;
            if (mc_yoffopt->count()) mc_yoff = mc_yoff_val;
            return cmd_mc(mc_pa, mc_n, mc_mmc, mc_eps, mc_y, mc_yoff, mc_side, mc_samples,
                          mc_seed, threads, mc_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
