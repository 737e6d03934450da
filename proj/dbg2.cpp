#include "sampcert/stability.hpp"
#include <cmath>
#include <cstdio>
#include <numeric>
using namespace sampcert;

struct Toggles {
    double eps = 1e-6;
    bool boundary = true;
    bool trace_pin = true;
    int degree_bump = 0;  // added to both s0 and s1 degrees
};

static void run(const char* tag, double T, int N, const Toggles& tg) {
    const int n = 1;
    auto vars = certificate_varset(n, Mode::Synchronous);
    SystemDef sys = make_system("lin", 1, {"-xk1"});
    Polynomial f = sys.f[0].embedded(vars);
    std::vector<bool> zmask(vars->size(), false);
    zmask[2] = true;
    Polynomial z2 = Polynomial::variable(vars, "z1").pow(2);

    SosProgram prog;
    DecisionPoly V = prog.new_decision_poly(vars, monomials_in_degrees(*vars, 2, N, &zmask));
    DecisionPoly F = prog.new_decision_poly(vars, N);
    SosPoly lower = prog.new_sos_poly(vars, monomials_in_degrees(*vars, 1, N / 2, &zmask));
    prog.assert_poly_eq(V.expr() - LinearPoly::from_poly(z2 * 1e-2), lower.expr());

    LinearPoly lhs(vars);
    lhs += V.expr().derivative("z1").times(f);
    lhs += F.expr().derivative("z1").times(f);
    lhs += F.expr().derivative("t");
    lhs += LinearPoly::from_poly(z2 * tg.eps);
    Polynomial t = Polynomial::variable(vars, "t");
    Polynomial g1 = t * (Polynomial::constant(vars, T) - t);
    const int dt = lhs.degree().value_or(0);
    std::vector<int> degs{dt + (dt % 2) + tg.degree_bump,
                          dt - 2 + ((dt - 2) % 2) + tg.degree_bump};
    prog.psatz_combine(LinearPoly(vars) - lhs, {g1}, &degs);

    if (tg.boundary) {
        LinearPoly end = F.expr().substitute_values({{"t", T}});
        LinearPoly start = F.expr().substitute_values({{"t", 0.0}})
                               .substitute({{"z1", Polynomial::variable(vars, "x1")}});
        prog.assert_poly_eq(end, start);
    }
    if (tg.trace_pin)
        prog.assert_poly_eq(lower.trace(),
                            LinearPoly::from_poly(Polynomial::constant(vars, 1.0)));

    if (const char* w = std::getenv("DBG_TRACE_W"))
        prog.set_trace_objective_weight(std::atof(w));
    auto compiled = prog.compile();
    SolverOptions opt;
    opt.verbose = std::getenv("DBG_VERBOSE") != nullptr;
    auto sol = solve(compiled.problem, opt);
    std::printf("%-40s status=%-12s iters=%2d  rows=%d\n", tag, to_string(sol.status),
                sol.iterations, compiled.problem.num_rows());
    if (sol.status == SolveStatus::Infeasible) {
        // largest-|y| rows of the improving ray, with labels
        std::vector<int> idx(sol.ray.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(),
                  [&](int a, int b) { return std::abs(sol.ray[a]) > std::abs(sol.ray[b]); });
        for (int k = 0; k < 8 && k < (int)idx.size(); ++k) {
            int r = idx[k];
            const char* lbl = compiled.problem.row_labels.empty()
                                  ? "?"
                                  : compiled.problem.row_labels[r].c_str();
            std::printf("    ray[%3d] = %+.4e   %s\n", r, sol.ray[r], lbl);
        }
    }
}

int main() {
    Toggles base;
    run("N=4 full", 1.0, 4, base);

    Toggles no_eps = base;
    no_eps.eps = 0.0;
    run("N=4 eps=0", 1.0, 4, no_eps);

    Toggles no_bd = base;
    no_bd.boundary = false;
    run("N=4 no boundary", 1.0, 4, no_bd);

    Toggles no_pin = base;
    no_pin.trace_pin = false;
    run("N=4 no trace pin", 1.0, 4, no_pin);

    Toggles bump = base;
    bump.degree_bump = 2;
    run("N=4 multiplier degrees +2", 1.0, 4, bump);

    Toggles bump4 = base;
    bump4.degree_bump = 4;
    run("N=4 multiplier degrees +4", 1.0, 4, bump4);

    run("N=6 full", 1.0, 6, base);
    run("N=4 full T=0.3", 0.3, 4, base);
    return 0;
}
