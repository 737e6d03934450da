#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sampcert/expr.hpp"

#include <cstdio>
#include <fstream>
#include <random>

using namespace sampcert;

TEST_CASE("held-sample dynamics expression") {
    auto vs = VarSet::create({"z", "x"});
    auto p = parse_polynomial("-z^3 + 2*z^2 - 1.1*x", vs);
    auto z = Polynomial::variable(vs, "z");
    auto x = Polynomial::variable(vs, "x");
    CHECK(p == -(z.pow(3)) + z.pow(2) * 2.0 - x * 1.1);
    CHECK(p.eval(std::vector<double>{1.0, 1.0}) == doctest::Approx(-0.1));
}

TEST_CASE("zero literal gives the zero polynomial") {
    auto vs = VarSet::create({"z"});
    CHECK(parse_polynomial("0", vs).is_zero());
    CHECK(parse_polynomial("0.0", vs).is_zero());
    CHECK(parse_polynomial("z - z", vs).is_zero());
}

TEST_CASE("double caret is a positioned error") {
    auto vs = VarSet::create({"z"});
    try {
        parse_polynomial("z^^2", vs);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 2);  // the second caret
    }
}

TEST_CASE("caret binds tighter than unary minus") {
    auto vs = VarSet::create({"z"});
    CHECK(parse_polynomial("-z^2", vs).eval(std::vector<double>{3.0}) == doctest::Approx(-9.0));
    CHECK(parse_polynomial("-2^2", vs).eval(std::vector<double>{0.0}) == doctest::Approx(-4.0));
    CHECK(parse_polynomial("(-z)^2", vs).eval(std::vector<double>{3.0}) == doctest::Approx(9.0));
    CHECK(parse_polynomial("1 - z^2", vs).eval(std::vector<double>{2.0}) == doctest::Approx(-3.0));
}

TEST_CASE("implicit multiplication is rejected") {
    auto vs = VarSet::create({"z"});
    CHECK_THROWS_WITH_AS(parse_polynomial("2z", vs),
                         "implicit multiplication is not supported; insert '*' (column 2)",
                         ParseError);
    CHECK_THROWS_AS(parse_polynomial("2 z", vs), ParseError);
    CHECK_THROWS_AS(parse_polynomial("(z)(z)", vs), ParseError);
    CHECK_THROWS_AS(parse_polynomial("z(z)", vs), ParseError);
}

TEST_CASE("non-polynomial input is rejected") {
    auto vs = VarSet::create({"z"});
    CHECK_THROWS_AS(parse_polynomial("z/2", vs), ParseError);
    CHECK_THROWS_AS(parse_polynomial("z^-1", vs), ParseError);
    CHECK_THROWS_AS(parse_polynomial("z^1.5", vs), ParseError);
    CHECK_THROWS_AS(parse_polynomial("z^(2)", vs), ParseError);
    CHECK_THROWS_AS(parse_polynomial("w + 1", vs), ParseError);
    CHECK_THROWS_AS(parse_polynomial("z +", vs), ParseError);
    CHECK_THROWS_AS(parse_polynomial("(z", vs), ParseError);
    CHECK_THROWS_AS(parse_polynomial("", vs), ParseError);
}

TEST_CASE("whitespace and nested parentheses") {
    auto vs = VarSet::create({"z", "x"});
    auto p = parse_polynomial("  ( z + 1 ) ^ 2  -  ( x - z ) * 2 ", vs);
    CHECK(p.eval(std::vector<double>{2.0, 5.0}) == doctest::Approx(9.0 - 6.0));
    auto q = parse_polynomial("((z))", vs);
    CHECK(q == Polynomial::variable(vs, "z"));
}

TEST_CASE("canonical text round-trips to the identical term map") {
    auto vs = VarSet::create({"z1", "xk1"});
    std::mt19937 rng(731u);
    std::uniform_real_distribution<double> coeff(-3.0, 3.0);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int trial = 0; trial < 50; ++trial) {
        Polynomial p(vs);
        for (const auto& m : monomials_upto(*vs, 4))
            if (pick(rng) == 0) p += Polynomial::term(vs, m, coeff(rng));
        auto text = p.to_string();
        auto q = parse_polynomial(text, vs);
        CHECK(q == p);  // exact: printed coefficients are shortest round-trip
        CHECK(q.to_string() == text);
    }
}

TEST_CASE("system with two states maps xk spelling onto x slots") {
    auto sys = make_system("jet", 2, {"-xk2 - 1.5*z1^2 - 0.5*z1^3", "-z2 + z1"});
    CHECK(sys.n == 2);
    CHECK(sys.vars->joined() == "z1,z2,x1,x2");
    REQUIRE(sys.f.size() == 2);
    // f1 at z=(1,0), x=(0,2): -2 - 1.5 - 0.5 = -4
    CHECK(sys.f[0].eval(std::vector<double>{1.0, 0.0, 0.0, 2.0}) == doctest::Approx(-4.0));
    CHECK(sys.f[1].eval(std::vector<double>{1.0, 3.0, 0.0, 0.0}) == doctest::Approx(-2.0));
    CHECK(sys.f[0].coefficient(Monomial({0, 0, 0, 1})) == doctest::Approx(-1.0));
}

TEST_CASE("system JSON parsing and validation") {
    const std::string good = R"({"name":"ex1","n":1,"dynamics":["-z1^3 + 2*z1^2 - 1.1*xk1"]})";
    auto sys = parse_system_text(good);
    CHECK(sys.name == "ex1");
    CHECK(sys.n == 1);
    CHECK(sys.f[0].eval(std::vector<double>{1.0, 1.0}) == doctest::Approx(-0.1));

    CHECK_THROWS_WITH_AS(
        parse_system_text(R"({"name":"bad","n":2,"dynamics":["-z1"]})"),
        "system file: declared n=2 but got 1 dynamics entries", std::invalid_argument);
    CHECK_THROWS_AS(parse_system_text(R"({"n":1,"dynamics":["z1"]})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_system_text(R"({"name":"x","dynamics":["z1"]})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_system_text(R"({"name":"x","n":1})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_system_text(R"({"name":"x","n":0,"dynamics":[]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_system_text("not json"), std::invalid_argument);

    // Variables outside z1..zn, xk1..xkn carry field context.
    try {
        parse_system_text(R"({"name":"x","n":1,"dynamics":["z2 + 1"]})");
        FAIL("expected error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("dynamics[0]") != std::string::npos);
        CHECK(std::string(e.what()).find("z2") != std::string::npos);
    }
}

TEST_CASE("system file loading") {
    const char* path = "test_expr_tmp_system.json";
    {
        std::ofstream out(path);
        out << R"({"name":"ex1","n":1,"dynamics":["-z1^3 + 2*z1^2 - 1.1*xk1"]})";
    }
    auto sys = parse_system(path);
    CHECK(sys.name == "ex1");
    CHECK(sys.vars->joined() == "z1,x1");
    std::remove(path);
    CHECK_THROWS_AS(parse_system("definitely_missing_file.json"), std::runtime_error);
}
