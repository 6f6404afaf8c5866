#pragma once

#include "waverate/expression.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace waverate {

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kSigmaFloor = 1e-6;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// One instance of the wave problem on [0,T] x [0,1] with homogeneous
// Dirichlet boundary: drift b(u), diffusion sigma(u), initial position u0(x)
// (must vanish at 0 and 1), initial velocity v0(x), observation point x0.
// u0 is assumed C^2 and v0 C^1; smoothness of user expressions is a
// documented assumption, not checked mechanically.
// Immutable after construction; safe to share across threads.
struct ProblemSpec {
    Expression b;
    Expression sigma;
    Expression u0;
    Expression v0;
    double T = 1.0;
    double x0 = 0.5;
    double lipschitz_hint = 1.0;

    static ProblemSpec make(const std::string& b_src, const std::string& sigma_src,
                            const std::string& u0_src, const std::string& v0_src,
                            double T, double x0, double lip = 1.0) {
        ProblemSpec s{Expression::parse(b_src), Expression::parse(sigma_src),
                      Expression::parse(u0_src), Expression::parse(v0_src),
                      T, x0, lip};
        s.validate_basic();
        return s;
    }

    // LINEAR admits a closed-form rate-function oracle; the other two satisfy
    // the nonvanishing-diffusion requirement with a margin of at least 1/2.
    static ProblemSpec preset(std::string_view name) {
        if (name == "LINEAR")
            return make("0", "1", "sin(3.141592653589793*x)", "0", 1.0, 0.5, 0.0);
        if (name == "NONLIN-A")
            return make("sin(x)", "2+sin(x)", "sin(3.141592653589793*x)", "0", 1.0, 0.5, 1.0);
        if (name == "NONLIN-B")
            return make("tanh(x)", "1+0.5*cos(x)", "sin(3.141592653589793*x)", "0", 1.0, 0.5, 1.0);
        throw DomainError("unknown preset '" + std::string(name) + "'");
    }

    // Flat key = value text, '#' comments. Keys: preset, b, sigma, u0, v0, T, x0.
    // A preset, when present, supplies defaults that explicit keys override.
    static ProblemSpec from_config(std::istream& in) {
        std::string b_src, sigma_src, u0_src, v0_src, preset_name;
        std::string T_src, x0_src;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
            auto trim = [](std::string s) {
                auto a = s.find_first_not_of(" \t\r");
                auto b2 = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b2 - a + 1);
            };
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (key == "preset") preset_name = val;
            else if (key == "b") b_src = val;
            else if (key == "sigma") sigma_src = val;
            else if (key == "u0") u0_src = val;
            else if (key == "v0") v0_src = val;
            else if (key == "T") T_src = val;
            else if (key == "x0") x0_src = val;
            else throw DomainError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        ProblemSpec s = preset_name.empty() ? preset("LINEAR") : preset(preset_name);
        if (!b_src.empty()) s.b = Expression::parse(b_src);
        if (!sigma_src.empty()) s.sigma = Expression::parse(sigma_src);
        if (!u0_src.empty()) s.u0 = Expression::parse(u0_src);
        if (!v0_src.empty()) s.v0 = Expression::parse(v0_src);
        if (!T_src.empty()) s.T = std::stod(T_src);
        if (!x0_src.empty()) s.x0 = std::stod(x0_src);
        s.validate_basic();
        return s;
    }

    static ProblemSpec from_config_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw DomainError("cannot open problem config '" + path + "'");
        return from_config(f);
    }

    void validate_basic() const {
        if (!(T > 0.0)) throw DomainError("T must be positive");
        if (!(x0 > 0.0 && x0 < 1.0)) throw DomainError("x0 must lie strictly inside (0,1)");
        if (std::fabs(u0.eval(0.0)) > 1e-12 || std::fabs(u0.eval(1.0)) > 1e-12)
            throw DomainError("u0 must vanish at both endpoints");
    }
};

struct ValidationReport {
    bool boundary_ok = false;
    double u0_at_0 = 0.0;
    double u0_at_1 = 0.0;
    double min_abs_sigma = 0.0;
    bool sigma_ok = false;       // min |sigma| >= sigma_floor on the sampled range
    double lipschitz_b = 0.0;    // max difference quotient over consecutive samples
    double lipschitz_sigma = 0.0;
    double range = 0.0;
    int samples = 0;

    bool passed() const { return boundary_ok && sigma_ok; }
};

// Samples b and sigma on [-range, range]. Global Lipschitzness cannot be
// verified mechanically, so the report carries sampled estimates only.
inline ValidationReport validate_problem(const ProblemSpec& spec, double range, int samples,
                                         double sigma_floor = kSigmaFloor) {
    if (!(range > 0.0)) throw DomainError("range must be positive");
    if (samples < 2) throw DomainError("need at least 2 samples");
    ValidationReport rep;
    rep.range = range;
    rep.samples = samples;
    rep.u0_at_0 = spec.u0.eval(0.0);
    rep.u0_at_1 = spec.u0.eval(1.0);
    rep.boundary_ok = std::fabs(rep.u0_at_0) <= 1e-12 && std::fabs(rep.u0_at_1) <= 1e-12;

    double min_sig = std::numeric_limits<double>::infinity();
    double lip_b = 0.0, lip_s = 0.0;
    double prev_x = -range;
    double prev_b = spec.b.eval(prev_x);
    double prev_s = spec.sigma.eval(prev_x);
    min_sig = std::fabs(prev_s);
    for (int i = 1; i < samples; ++i) {
        double x = -range + 2.0 * range * static_cast<double>(i) / (samples - 1);
        double bx = spec.b.eval(x);
        double sx = spec.sigma.eval(x);
        min_sig = std::min(min_sig, std::fabs(sx));
        double dx = x - prev_x;
        lip_b = std::max(lip_b, std::fabs(bx - prev_b) / dx);
        lip_s = std::max(lip_s, std::fabs(sx - prev_s) / dx);
        prev_x = x;
        prev_b = bx;
        prev_s = sx;
    }
    rep.min_abs_sigma = min_sig;
    rep.sigma_ok = min_sig >= sigma_floor;
    rep.lipschitz_b = lip_b;
    rep.lipschitz_sigma = lip_s;
    return rep;
}

} // namespace waverate
