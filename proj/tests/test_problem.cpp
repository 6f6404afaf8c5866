#include "waverate/problem.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace waverate;

TEST_CASE("presets are well formed") {
    for (const char* name : {"LINEAR", "NONLIN-A", "NONLIN-B"}) {
        ProblemSpec s = ProblemSpec::preset(name);
        CHECK(s.T == 1.0);
        CHECK(s.x0 == 0.5);
        ValidationReport rep = validate_problem(s, 3.0, 501);
        CHECK(rep.boundary_ok);
        CHECK(rep.sigma_ok);
        CHECK(rep.min_abs_sigma >= 0.5);
    }
    CHECK_THROWS_AS(ProblemSpec::preset("NOPE"), DomainError);
}

TEST_CASE("boundary compatibility and sigma floor") {
    ProblemSpec s = ProblemSpec::preset("LINEAR");
    ValidationReport rep = validate_problem(s, 1.0, 11);
    CHECK(rep.boundary_ok);
    CHECK(rep.min_abs_sigma == 1.0);

    // sigma = x vanishes inside the sampled range
    ProblemSpec bad{Expression::parse("0"), Expression::parse("x"),
                    Expression::parse("sin(3.141592653589793*x)"), Expression::parse("0"),
                    1.0, 0.5, 1.0};
    ValidationReport r2 = validate_problem(bad, 1.0, 101);
    CHECK_FALSE(r2.sigma_ok);
    CHECK(r2.min_abs_sigma == Catch::Approx(0.0).margin(1e-14));

    // u0 that does not vanish at the ends is rejected at construction
    CHECK_THROWS_AS(ProblemSpec::make("0", "1", "cos(x)", "0", 1.0, 0.5), DomainError);
}

TEST_CASE("sampled Lipschitz estimate of sin on [-5,5]") {
    ProblemSpec s = ProblemSpec::preset("NONLIN-A");
    ValidationReport rep = validate_problem(s, 5.0, 10001);
    CHECK(rep.lipschitz_b >= 0.99);
    CHECK(rep.lipschitz_b <= 1.0);
    CHECK(rep.lipschitz_sigma >= 0.99);
    CHECK(rep.lipschitz_sigma <= 1.0);
}

TEST_CASE("validate_problem flags exactly the sub-floor specs") {
    auto make_sigma = [](const std::string& src) {
        return ProblemSpec{Expression::parse("0"), Expression::parse(src),
                           Expression::parse("sin(3.141592653589793*x)"),
                           Expression::parse("0"), 1.0, 0.5, 1.0};
    };
    CHECK(validate_problem(make_sigma("1"), 2.0, 101).sigma_ok);
    CHECK(validate_problem(make_sigma("2+sin(x)"), 5.0, 1001).sigma_ok);
    CHECK_FALSE(validate_problem(make_sigma("x*x"), 1.0, 101).sigma_ok);
    CHECK_FALSE(validate_problem(make_sigma("sin(x)"), 4.0, 1001).sigma_ok);
    CHECK_THROWS_AS(validate_problem(make_sigma("1"), -1.0, 10), DomainError);
    CHECK_THROWS_AS(validate_problem(make_sigma("1"), 1.0, 1), DomainError);
}

TEST_CASE("config files parse with preset overrides and reject unknown keys") {
    std::istringstream in(
        "# test config\n"
        "preset = NONLIN-A\n"
        "T = 0.75\n"
        "x0 = 0.25\n");
    ProblemSpec s = ProblemSpec::from_config(in);
    CHECK(s.T == 0.75);
    CHECK(s.x0 == 0.25);
    CHECK(s.b.eval(0.3) == Catch::Approx(std::sin(0.3)).margin(1e-15));

    std::istringstream bad("frobnicate = 3\n");
    CHECK_THROWS_AS(ProblemSpec::from_config(bad), DomainError);

    std::istringstream bad2("b 1\n");
    CHECK_THROWS_AS(ProblemSpec::from_config(bad2), DomainError);

    std::istringstream full(
        "b = 0\n"
        "sigma = 2\n"
        "u0 = sin(3.141592653589793*x)\n"
        "v0 = 0\n"
        "T = 2\n"
        "x0 = 0.5\n");
    ProblemSpec f = ProblemSpec::from_config(full);
    CHECK(f.sigma.eval(0.0) == 2.0);
    CHECK(f.T == 2.0);
}
