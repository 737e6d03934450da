#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sampcert/sosprog.hpp"

#include <cmath>
#include <random>

using namespace sampcert;

namespace {

VarSetPtr vars1() { return std::make_shared<VarSet>(std::vector<std::string>{"x"}); }
VarSetPtr vars3() {
    return std::make_shared<VarSet>(std::vector<std::string>{"x", "y", "z"});
}

Polynomial parse1(VarSetPtr vs, double c0, double c1, double c2) {
    // c0 + c1*x + c2*x^2 without going through the text parser.
    Polynomial x = Polynomial::variable(vs, "x");
    return Polynomial::constant(vs, c0) + x * c1 + x * x * c2;
}

}  // namespace

TEST_CASE("decision poly unknown counts follow the basis size") {
    SosProgram prog;
    auto d1 = prog.new_decision_poly(vars1(), 4);
    CHECK(d1.ids.size() == 5);  // 1, x, x^2, x^3, x^4
    CHECK(prog.unknown_count() == 5);

    auto d3 = prog.new_decision_poly(vars3(), 4);
    CHECK(d3.ids.size() == 35);  // C(3+4,4)
    CHECK(prog.unknown_count() == 40);

    auto d0 = prog.new_decision_poly(vars3(), 0);
    CHECK(d0.ids.size() == 1);

    CHECK_THROWS_AS(prog.new_decision_poly(vars1(), -1), std::invalid_argument);
}

TEST_CASE("sos poly gram sizing and id layout") {
    SosProgram prog;
    auto s = prog.new_sos_poly(vars1(), 2);  // basis 1, x
    CHECK(s.dim() == 2);
    CHECK(s.gram_ids.size() == 3);
    CHECK(s.id_at(0, 0) == 0);
    CHECK(s.id_at(0, 1) == 1);
    CHECK(s.id_at(1, 1) == 2);
    CHECK_THROWS_AS(s.id_at(1, 0), std::invalid_argument);

    auto big = prog.new_sos_poly(vars3(), 6);  // half-degree 3 over 3 vars
    CHECK(big.dim() == 20);                    // C(3+3,3)
    CHECK(big.gram_ids.size() == 210);

    CHECK_THROWS_AS(prog.new_sos_poly(vars1(), 3), std::invalid_argument);
    CHECK_THROWS_AS(prog.new_sos_poly(vars1(), 5), std::invalid_argument);
}

TEST_CASE("single coefficient-matching row pins an unknown") {
    SosProgram prog;
    auto vs = vars1();
    Polynomial x2 = Polynomial::variable(vs, "x").pow(2);
    auto c = prog.new_decision_poly(vs, std::vector<Monomial>{Monomial::one(1)});

    // c * x^2 == 3 x^2  ->  one row, c = 3.
    prog.assert_poly_eq(c.expr().times(x2), LinearPoly::from_poly(x2 * 3.0));
    CHECK(prog.row_count() == 1);

    auto compiled = prog.compile();
    auto sol = solve(compiled.problem, {});
    REQUIRE(sol.status == SolveStatus::Feasible);
    auto vals = compiled.extract(sol);
    CHECK(std::abs(vals[static_cast<std::size_t>(c.ids[0])] - 3.0) < 1e-6);
}

TEST_CASE("x^2 + 2x + 2 admits the unique Gram [[2,1],[1,1]]") {
    SosProgram prog;
    auto vs = vars1();
    auto s = prog.new_sos_poly(vs, 2);
    Polynomial target = parse1(vs, 2.0, 2.0, 1.0);
    prog.assert_poly_eq(s.expr(), LinearPoly::from_poly(target));
    CHECK(prog.row_count() == 3);  // 1, x, x^2

    auto compiled = prog.compile();
    REQUIRE(compiled.problem.blocks.size() == 1);
    CHECK(compiled.problem.blocks[0].kind == BlockKind::Psd);
    CHECK(compiled.problem.blocks[0].size == 2);
    CHECK(compiled.problem.rhs.size() == 3);

    auto sol = solve(compiled.problem, {});
    REQUIRE(sol.status == SolveStatus::Feasible);
    auto vals = compiled.extract(sol);
    Eigen::MatrixXd G = s.gram(vals);
    // Coefficient matching leaves no freedom here: G is fully determined.
    CHECK(std::abs(G(0, 0) - 2.0) < 1e-6);
    CHECK(std::abs(G(0, 1) - 1.0) < 1e-6);
    CHECK(std::abs(G(1, 1) - 1.0) < 1e-6);

    Polynomial rebuilt = gram_to_poly(vs, s.half_basis, G);
    CHECK((rebuilt - target).max_abs_coefficient() < 1e-6);
}

TEST_CASE("negative and odd polynomials are not sums of squares") {
    {
        SosProgram prog;
        auto vs = vars1();
        auto s = prog.new_sos_poly(vs, 2);
        Polynomial neg = Polynomial::variable(vs, "x").pow(2) * -1.0;
        prog.assert_poly_eq(s.expr(), LinearPoly::from_poly(neg));
        auto sol = solve(prog.compile().problem, {});
        CHECK(sol.status == SolveStatus::Infeasible);
    }
    {
        SosProgram prog;
        auto vs = vars1();
        auto s = prog.new_sos_poly(vs, 2);
        Polynomial lin = Polynomial::variable(vs, "x");
        prog.assert_poly_eq(s.expr(), LinearPoly::from_poly(lin));
        auto sol = solve(prog.compile().problem, {});
        CHECK(sol.status == SolveStatus::Infeasible);
    }
}

TEST_CASE("psatz combination certifies nonnegativity on a segment") {
    // t(1-t) >= 0 on {t : t(1-t) >= 0} via t(1-t) = s0 + s1 * t(1-t).
    SosProgram prog;
    auto vs = std::make_shared<VarSet>(std::vector<std::string>{"t"});
    Polynomial t = Polynomial::variable(vs, "t");
    Polynomial g = t * (Polynomial::constant(vs, 1.0) - t);

    auto handles = prog.psatz_combine(LinearPoly::from_poly(g), {g});
    CHECK(handles.s.size() == 1);
    CHECK(handles.s0.dim() == 2);  // degree-2 SOS: basis 1, t
    CHECK(handles.s[0].dim() == 1);  // degree-0 multiplier

    auto compiled = prog.compile();
    auto sol = solve(compiled.problem, {});
    REQUIRE(sol.status == SolveStatus::Feasible);

    // Re-expand the certificate and compare against the target.
    auto vals = compiled.extract(sol);
    Polynomial lhs = gram_to_poly(vs, handles.s0.half_basis, handles.s0.gram(vals)) +
                     gram_to_poly(vs, handles.s[0].half_basis, handles.s[0].gram(vals)) * g;
    double scale = std::max(1.0, g.max_abs_coefficient());
    CHECK((lhs - g).max_abs_coefficient() < 1e-7 * scale);
}

TEST_CASE("psatz combination rejects a negative constant target") {
    SosProgram prog;
    auto vs = std::make_shared<VarSet>(std::vector<std::string>{"t"});
    Polynomial t = Polynomial::variable(vs, "t");
    Polynomial g = t * (Polynomial::constant(vs, 1.0) - t);
    Polynomial minus1 = Polynomial::constant(vs, -1.0);

    std::vector<int> degs{2, 0};
    prog.psatz_combine(LinearPoly::from_poly(minus1), {g}, &degs);
    auto sol = solve(prog.compile().problem, {});
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("structurally unmatchable monomials are named in the error") {
    {
        SosProgram prog;
        auto vs = vars1();
        Polynomial x = Polynomial::variable(vs, "x");
        auto c = prog.new_decision_poly(vs, std::vector<Monomial>{Monomial::one(1)});
        // c*x == x^2 leaves x^2 unmatched.
        CHECK_THROWS_WITH_AS(
            prog.assert_poly_eq(c.expr().times(x), LinearPoly::from_poly(x * x)),
            doctest::Contains("x^2"), std::invalid_argument);
    }
    {
        // Multiplier degrees too small to reach the target's top monomial.
        SosProgram prog;
        auto vs = std::make_shared<VarSet>(std::vector<std::string>{"t"});
        Polynomial t = Polynomial::variable(vs, "t");
        Polynomial g = t * (Polynomial::constant(vs, 1.0) - t);
        Polynomial target = t.pow(4);
        std::vector<int> degs{2, 0};  // max reachable degree is 2
        CHECK_THROWS_WITH_AS(prog.psatz_combine(LinearPoly::from_poly(target), {g}, &degs),
                             doctest::Contains("t^4"), std::invalid_argument);
    }
}

TEST_CASE("trace constraint normalizes a scaled certificate") {
    // s(x) = c (1 + x^2) SOS with diagonal Gram [c, c]; tr = 2c = 1 -> c = 1/2.
    SosProgram prog;
    auto vs = vars1();
    auto s = prog.new_sos_poly(vs, 2);
    auto c = prog.new_decision_poly(vs, std::vector<Monomial>{Monomial::one(1)});
    Polynomial one_plus_x2 = parse1(vs, 1.0, 0.0, 1.0);

    prog.assert_poly_eq(s.expr(), c.expr().times(one_plus_x2));
    prog.assert_poly_eq(s.trace(), LinearPoly::from_poly(Polynomial::constant(vs, 1.0)));

    auto compiled = prog.compile();
    auto sol = solve(compiled.problem, {});
    REQUIRE(sol.status == SolveStatus::Feasible);
    auto vals = compiled.extract(sol);
    CHECK(std::abs(vals[static_cast<std::size_t>(c.ids[0])] - 0.5) < 1e-6);
    Eigen::MatrixXd G = s.gram(vals);
    CHECK(std::abs(G.trace() - 1.0) < 1e-7);
    CHECK(std::abs(G(0, 0) - 0.5) < 1e-6);
    CHECK(std::abs(G(0, 1)) < 1e-6);
}

TEST_CASE("identical build sequences compile to byte-identical problems") {
    auto build = [] {
        SosProgram prog;
        auto vs = std::make_shared<VarSet>(std::vector<std::string>{"t", "x"});
        Polynomial t = Polynomial::variable(vs, "t");
        Polynomial x = Polynomial::variable(vs, "x");
        Polynomial g = t * (Polynomial::constant(vs, 1.0) - t);
        auto c = prog.new_decision_poly(vs, 2);
        prog.psatz_combine(c.expr() - LinearPoly::from_poly(x * x * 0.25), {g});
        return prog.compile().problem.dump();
    };
    CHECK(build() == build());
}

TEST_CASE("linear expression calculus commutes with instantiation") {
    SosProgram prog;
    auto vs = vars3();
    auto d = prog.new_decision_poly(vs, 3);
    LinearPoly e = d.expr();

    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    std::vector<double> vals(static_cast<std::size_t>(prog.unknown_count()));
    for (auto& v : vals) v = unif(rng);

    Polynomial base = e.instantiate(vals);

    CHECK((e.derivative("y").instantiate(vals) - base.derivative("y"))
              .max_abs_coefficient() < 1e-12);

    std::map<std::string, Polynomial> swap{{"x", Polynomial::variable(vs, "y")},
                                           {"y", Polynomial::variable(vs, "x")}};
    CHECK((e.substitute(swap).instantiate(vals) - base.substitute(swap))
              .max_abs_coefficient() < 1e-12);

    std::map<std::string, double> pin{{"z", 0.75}};
    CHECK((e.substitute_values(pin).instantiate(vals) - base.substitute_values(pin))
              .max_abs_coefficient() < 1e-12);

    auto wide = std::make_shared<VarSet>(std::vector<std::string>{"w", "x", "y", "z"});
    CHECK((e.embedded(wide).instantiate(vals) - base.embedded(wide))
              .max_abs_coefficient() < 1e-12);

    // Scalar algebra on expressions matches polynomial algebra.
    LinearPoly combo = e * 2.5 - e + (-e) * 0.5;
    CHECK((combo.instantiate(vals) - base).max_abs_coefficient() < 1e-12);
}

TEST_CASE("mixing variable sets is rejected") {
    SosProgram prog;
    auto a = prog.new_decision_poly(vars1(), 1);
    auto b = prog.new_decision_poly(vars3(), 1);
    CHECK_THROWS_AS(a.expr() + b.expr(), std::invalid_argument);
    CHECK_THROWS_AS(
        a.expr().times(Polynomial::variable(vars3(), "y")), std::invalid_argument);
    CHECK_THROWS_AS(prog.psatz_combine(a.expr(), {Polynomial::variable(vars3(), "y")}),
                    std::invalid_argument);
}

TEST_CASE("compile places free block first and weights gram traces") {
    SosProgram prog;
    auto vs = vars1();
    auto c = prog.new_decision_poly(vs, 0);
    auto s = prog.new_sos_poly(vs, 2);
    prog.assert_poly_eq(s.expr() - c.expr(),
                        LinearPoly::from_poly(parse1(vs, 1.0, 0.0, 1.0)));
    prog.set_trace_objective_weight(1e-3);

    auto compiled = prog.compile();
    REQUIRE(compiled.problem.blocks.size() == 2);
    CHECK(compiled.problem.blocks[0].kind == BlockKind::Free);
    CHECK(compiled.problem.blocks[1].kind == BlockKind::Psd);
    CHECK(compiled.free_block == 0);
    REQUIRE(compiled.psd_block.size() == 1);
    CHECK(compiled.psd_block[0] == 1);

    // Objective: one diagonal entry per Gram row, at the configured weight.
    REQUIRE(compiled.problem.objective.size() == 2);
    for (const auto& o : compiled.problem.objective) {
        CHECK(o.block == 1);
        CHECK(o.r == o.c);
        CHECK(o.value == 1e-3);
    }

    // Off-diagonal Gram coefficients are emitted halved.
    double offdiag = 0.0, diag_x2 = 0.0;
    for (const auto& a : compiled.problem.A) {
        if (a.block != 1) continue;
        if (a.r == 0 && a.c == 1) offdiag = a.value;
        if (a.r == 1 && a.c == 1) diag_x2 = a.value;
    }
    CHECK(offdiag == 1.0);  // poly coefficient 2 on x, halved
    CHECK(diag_x2 == 1.0);
}
