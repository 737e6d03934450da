#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sampcert/poly.hpp"

#include <cmath>
#include <random>

using namespace sampcert;

namespace {

// Small exact rationals (multiples of 1/8) so ring-axiom checks can demand
// bitwise equality instead of tolerances.
Polynomial random_poly(const VarSetPtr& vs, int max_deg, std::mt19937& rng) {
    std::uniform_int_distribution<int> coeff(-8, 8);
    std::uniform_int_distribution<int> pick(0, 3);
    Polynomial p(vs);
    for (const auto& m : monomials_upto(*vs, max_deg)) {
        if (pick(rng) != 0) continue;
        p += Polynomial::term(vs, m, coeff(rng) / 8.0);
    }
    return p;
}

}  // namespace

TEST_CASE("varset basics") {
    auto vs = VarSet::create({"x", "y"});
    CHECK(vs->size() == 2);
    CHECK(vs->require("y") == 1);
    CHECK(!vs->index_of("z").has_value());
    CHECK_THROWS_AS(vs->require("z"), std::invalid_argument);
    CHECK_THROWS_AS(VarSet::create({"x", "x"}), std::invalid_argument);
    CHECK(vs->joined() == "x,y");
}

TEST_CASE("grlex order lists 1,x,y,x^2,xy,y^2") {
    auto vs = VarSet::create({"x", "y"});
    auto ms = monomials_upto(*vs, 2);
    REQUIRE(ms.size() == 6);
    CHECK(to_string(ms[0], *vs) == "1");
    CHECK(to_string(ms[1], *vs) == "x");
    CHECK(to_string(ms[2], *vs) == "y");
    CHECK(to_string(ms[3], *vs) == "x^2");
    CHECK(to_string(ms[4], *vs) == "x*y");
    CHECK(to_string(ms[5], *vs) == "y^2");
    for (std::size_t i = 0; i + 1 < ms.size(); ++i) {
        CHECK(grlex_less(ms[i], ms[i + 1]));
        CHECK(!grlex_less(ms[i + 1], ms[i]));
    }
}

TEST_CASE("monomial counts match C(n+d,d)") {
    auto count = [](int n, int d) {
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
        auto vs = VarSet::create(names);
        return monomials_upto(*vs, d).size();
    };
    CHECK(count(1, 2) == 3);
    CHECK(count(2, 2) == 6);
    CHECK(count(3, 5) == 56);
    auto binom = [](int n, int k) {
        long long r = 1;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return static_cast<std::size_t>(r);
    };
    for (int n = 1; n <= 6; ++n)
        for (int d = 0; d <= 12 - n; ++d) CHECK(count(n, d) == binom(n + d, d));
}

TEST_CASE("masked monomial ranges") {
    auto vs = VarSet::create({"t", "x", "z"});
    std::vector<bool> only_z{false, false, true};
    auto ms = monomials_in_degrees(*vs, 1, 3, &only_z);
    REQUIRE(ms.size() == 3);
    CHECK(to_string(ms[0], *vs) == "z");
    CHECK(to_string(ms[1], *vs) == "z^2");
    CHECK(to_string(ms[2], *vs) == "z^3");

    std::vector<bool> xz{false, true, true};
    auto ms2 = monomials_in_degrees(*vs, 2, 2, &xz);
    REQUIRE(ms2.size() == 3);
    CHECK(to_string(ms2[0], *vs) == "x^2");
    CHECK(to_string(ms2[1], *vs) == "x*z");
    CHECK(to_string(ms2[2], *vs) == "z^2");
}

TEST_CASE("arithmetic basics") {
    auto vs = VarSet::create({"x", "z"});
    auto x = Polynomial::variable(vs, "x");
    auto z = Polynomial::variable(vs, "z");
    auto one = Polynomial::constant(vs, 1.0);

    CHECK(((x * x + one) + (x * x * 2.0 - one)).to_string() == "3*x^2");
    CHECK(((x + one) * (x - one)).to_string() == "-1 + x^2");
    CHECK(((x * 2.0) * (z * 3.0)).to_string() == "6*x*z");
    CHECK((x - x).is_zero());
    CHECK(!(x - x).degree().has_value());
    CHECK((x * x * x).degree() == 3);
    CHECK((-x).to_string() == "-x");
    CHECK((x * 0.0).is_zero());
}

TEST_CASE("derivatives") {
    auto vs = VarSet::create({"x", "y"});
    auto x = Polynomial::variable(vs, "x");
    auto y = Polynomial::variable(vs, "y");

    CHECK((x.pow(3)).derivative("x").to_string() == "3*x^2");
    CHECK((x.pow(3)).derivative("y").is_zero());
    auto p = x * x * y + y * 2.0;
    CHECK(p.derivative("x").to_string() == "2*x*y");
    CHECK(p.derivative("y").to_string() == "2 + x^2");
}

TEST_CASE("substitution") {
    auto vs = VarSet::create({"t", "T", "x"});
    auto t = Polynomial::variable(vs, "t");
    auto T = Polynomial::variable(vs, "T");

    // t*(T - t) vanishes at both interval endpoints.
    auto g = t * (T - t);
    CHECK(g.substitute({{"t", Polynomial::zero(vs)}}).is_zero());
    CHECK(g.substitute({{"t", T}}).is_zero());

    // Simultaneous: swap two variables in one shot.
    auto x = Polynomial::variable(vs, "x");
    auto p = t * t + x;
    auto swapped = p.substitute({{"t", x}, {"x", t}});
    CHECK(swapped.to_string() == "t + x^2");

    CHECK(g.substitute_values({{"T", 2.0}}).to_string() == "2*t - t^2");
}

TEST_CASE("substitute-then-evaluate agrees with evaluate-after-binding") {
    auto vs = VarSet::create({"a", "b", "c"});
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> unit(-1.5, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
        auto p = random_poly(vs, 3, rng);
        auto image = random_poly(vs, 2, rng);
        auto q = p.substitute({{"b", image}});
        double a = unit(rng), b = unit(rng), c = unit(rng);
        double ib = image.eval(std::vector<double>{a, b, c});
        double lhs = q.eval(std::vector<double>{a, b, c});
        double rhs = p.eval(std::vector<double>{a, ib, c});
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("evaluation of a held-sample vector field") {
    auto vs = VarSet::create({"z1", "xk1"});
    auto z = Polynomial::variable(vs, "z1");
    auto xk = Polynomial::variable(vs, "xk1");
    auto f = -(z.pow(3)) + z * z * 2.0 - xk * 1.1;
    CHECK(f.eval(std::vector<double>{1.0, 1.0}) == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(f.eval(std::map<std::string, double>{{"z1", 1.0}, {"xk1", 1.0}}) ==
          doctest::Approx(-0.1).epsilon(1e-15));
}

TEST_CASE("ring axioms and Leibniz rule hold exactly on random inputs") {
    auto vs = VarSet::create({"u", "v"});
    std::mt19937 rng(987654321u);
    for (int trial = 0; trial < 1000; ++trial) {
        auto p = random_poly(vs, 2, rng);
        auto q = random_poly(vs, 2, rng);
        auto r = random_poly(vs, 2, rng);

        CHECK(p + q == q + p);
        CHECK((p + q) + r == p + (q + r));
        CHECK(p * q == q * p);
        CHECK((p * q) * r == p * (q * r));
        CHECK(p * (q + r) == p * q + p * r);
        CHECK(p - p == Polynomial::zero(vs));
        CHECK(p * Polynomial::constant(vs, 1.0) == p);

        // d(pq) = p' q + p q' with exact dyadic coefficients.
        auto lhs = (p * q).derivative("u");
        auto rhs = p.derivative("u") * q + p * q.derivative("u");
        CHECK(lhs == rhs);
    }
}

TEST_CASE("pruning removes tiny assembly noise") {
    auto vs = VarSet::create({"x"});
    auto x = Polynomial::variable(vs, "x");
    auto p = x * 1.0 + Polynomial::constant(vs, 5e-15);
    CHECK(p.term_count() == 2);
    CHECK(p.pruned(1e-14).term_count() == 1);
    CHECK(p.pruned(1e-14).to_string() == "x");
}

TEST_CASE("embedding into a larger variable set") {
    auto small = VarSet::create({"z1", "xk1"});
    auto big = VarSet::create({"t", "x1", "z1", "xk1"});
    auto z = Polynomial::variable(small, "z1");
    auto xk = Polynomial::variable(small, "xk1");
    auto f = z * z - xk * 1.1;
    auto g = f.embedded(big);
    CHECK(g.varset() == big);
    CHECK(g.to_string() == "-1.1*xk1 + z1^2");

    // Missing target slot for a used variable is an error.
    auto tiny = VarSet::create({"z1"});
    CHECK_THROWS_AS(f.embedded(tiny), std::invalid_argument);
    // ... but unused variables may be dropped freely.
    CHECK((z * z).embedded(tiny).to_string() == "z1^2");
}

TEST_CASE("string round-trip style") {
    auto vs = VarSet::create({"x", "y"});
    auto x = Polynomial::variable(vs, "x");
    auto y = Polynomial::variable(vs, "y");
    CHECK(Polynomial::zero(vs).to_string() == "0");
    CHECK(Polynomial::constant(vs, -2.5).to_string() == "-2.5");
    CHECK((x * x - y * 0.5 + Polynomial::constant(vs, 1.0)).to_string() ==
          "1 - 0.5*y + x^2");
    CHECK((x * -1.0 - y).to_string() == "-x - y");
}
