#include "waverate/expression.hpp"
#include "waverate/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

using namespace waverate;

TEST_CASE("parser handles the basic grammar") {
    auto e = Expression::parse("2 + sin(x)");
    CHECK(e.eval(0.0) == Catch::Approx(2.0).margin(1e-15));
    CHECK(e.eval(1.0) == Catch::Approx(2.0 + std::sin(1.0)).margin(1e-15));

    auto id = Expression::parse("x");
    CHECK(id.eval(0.37) == 0.37);

    auto s = Expression::parse("sin(3.141592653589793*x)");
    CHECK(s.eval(0.5) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("evaluation matches the host math library") {
    CHECK(Expression::parse("0").eval(123.0) == 0.0);
    CHECK(Expression::parse("x*x - x").eval(1.0) == 0.0);
    CHECK(Expression::parse("exp(x)").eval(1.0) == Catch::Approx(2.718281828459045).margin(1e-12));
    CHECK(Expression::parse("tanh(x)").eval(0.3) == Catch::Approx(std::tanh(0.3)).margin(1e-15));
    CHECK(Expression::parse("min(x, 2)").eval(5.0) == 2.0);
    CHECK(Expression::parse("max(x, 2)").eval(5.0) == 5.0);
    CHECK(Expression::parse("abs(x)").eval(-3.5) == 3.5);
}

TEST_CASE("precedence: power binds tighter than unary minus") {
    CHECK(Expression::parse("-x^2").eval(3.0) == -9.0);
    CHECK(Expression::parse("(-x)^2").eval(3.0) == 9.0);
    CHECK(Expression::parse("2*x^3").eval(2.0) == 16.0);
    CHECK(Expression::parse("x^-2").eval(2.0) == 0.25);
    CHECK(Expression::parse("1 - 2 - 3").eval(0.0) == -4.0);
    CHECK(Expression::parse("8 / 2 / 2").eval(0.0) == 2.0);
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK_THROWS_AS(Expression::parse(""), ParseError);
    CHECK_THROWS_AS(Expression::parse("2 +"), ParseError);
    CHECK_THROWS_AS(Expression::parse("foo(x)"), ParseError);
    CHECK_THROWS_AS(Expression::parse("sin(x, 2)"), ParseError);
    CHECK_THROWS_AS(Expression::parse("min(x)"), ParseError);
    CHECK_THROWS_AS(Expression::parse("x^y"), ParseError);
    CHECK_THROWS_AS(Expression::parse("2 + * 3"), ParseError);
    try {
        Expression::parse("1 + @");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
}

TEST_CASE("evaluation errors instead of NaN propagation") {
    CHECK_THROWS_AS(Expression::parse("1/x").eval(0.0), EvalError);
    CHECK_THROWS_AS(Expression::parse("x^-1").eval(0.0), EvalError);
    CHECK_THROWS_AS(Expression::parse("exp(x)").eval(1000.0), EvalError);
    CHECK_NOTHROW(Expression::parse("1/x").eval(2.0));
}

namespace {

// random expression source, depth-bounded
std::string random_expr(Rng& rng, int depth) {
    if (depth == 0 || rng.uniform() < 0.3) {
        if (rng.uniform() < 0.5) return "x";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", rng.uniform(-3.0, 3.0));
        return buf;
    }
    switch (rng.next_u64() % 8) {
        case 0: return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
        case 1: return "(" + random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1) + ")";
        case 2: return "(" + random_expr(rng, depth - 1) + " * " + random_expr(rng, depth - 1) + ")";
        case 3: return "sin(" + random_expr(rng, depth - 1) + ")";
        case 4: return "cos(" + random_expr(rng, depth - 1) + ")";
        case 5: return "tanh(" + random_expr(rng, depth - 1) + ")";
        case 6: return "min(" + random_expr(rng, depth - 1) + ", " + random_expr(rng, depth - 1) + ")";
        default: return "(" + random_expr(rng, depth - 1) + ")^2";
    }
}

} // namespace

TEST_CASE("print -> parse round trip is evaluation-stable") {
    Rng rng(7, 0);
    for (int trial = 0; trial < 60; ++trial) {
        std::string src = random_expr(rng, 4);
        Expression a = Expression::parse(src);
        Expression b = Expression::parse(a.to_string());
        Expression c = Expression::parse(b.to_string());
        for (int i = 0; i < 100; ++i) {
            double x = rng.uniform(-5.0, 5.0);
            double va = a.eval(x);
            CHECK(b.eval(x) == Catch::Approx(va).margin(1e-12));
            CHECK(c.eval(x) == Catch::Approx(va).margin(1e-12));
        }
    }
}

TEST_CASE("numeric derivative is accurate for smooth nodes") {
    auto e = Expression::parse("sin(x)");
    for (double x : {-1.0, 0.0, 0.4, 2.0})
        CHECK(e.derivative(x) == Catch::Approx(std::cos(x)).margin(1e-9));
    auto q = Expression::parse("2+sin(x)");
    CHECK(q.derivative(0.7) == Catch::Approx(std::cos(0.7)).margin(1e-9));
}
