#include "sampcert/sosprog.hpp"
#include "sampcert/stability.hpp"
#include <cstdio>
using namespace sampcert;

// Continuous-time global SOS Lyapunov probe: V in z only, deg 2..N,
// V - mu1*||z||^2 SOS and -dV/dt - eps*||z||^2 SOS (global, no multipliers).
void run(const char* tag, int n, const std::vector<std::string>& fexprs, int N) {
    VarSetPtr vars = certificate_varset(n, Mode::Synchronous);
    std::vector<bool> zmask(vars->size(), false);
    for (int i = 0; i < n; ++i) zmask[static_cast<std::size_t>(1 + n + i)] = true;
    SystemDef sys = make_system(tag, static_cast<std::size_t>(n), fexprs);
    std::vector<Polynomial> f;
    for (const auto& fi : sys.f) f.push_back(fi.embedded(vars));

    SosProgram prog;
    DecisionPoly V = prog.new_decision_poly(vars, monomials_in_degrees(*vars, 2, N, &zmask));
    SosPoly lower = prog.new_sos_poly(vars, monomials_in_degrees(*vars, 1, N / 2, &zmask));
    Polynomial z2 = Polynomial::constant(vars, 0.0);
    for (int i = 0; i < n; ++i) {
        Polynomial zi = Polynomial::variable(vars, std::string("z") + std::to_string(i + 1));
        z2 = z2 + zi * zi;
    }
    prog.assert_poly_eq(V.expr() - LinearPoly::from_poly(z2 * 1e-2), lower.expr());

    LinearPoly lhs(vars);
    for (int i = 0; i < n; ++i)
        lhs += V.expr().derivative(std::string("z") + std::to_string(i + 1)).times(
            f[static_cast<std::size_t>(i)]);
    lhs += LinearPoly::from_poly(z2 * 1e-6);
    const int dt = (-lhs).degree().value_or(0);
    const int half = (dt + (dt % 2)) / 2;
    SosPoly s0 = prog.new_sos_poly(vars, monomials_in_degrees(*vars, 1, half, &zmask));
    prog.assert_poly_eq(-lhs, s0.expr());
    prog.assert_poly_eq(lower.trace(), LinearPoly::from_poly(Polynomial::constant(vars, 1.0)));

    CompiledProgram cp = prog.compile();
    SolverOptions opt;
    ConicSolution ms = solve_max_margin(cp.problem, opt);
    std::printf("%s N=%d: %s | %s\n", tag, N, to_string(ms.status), ms.message.c_str());
}

int main() {
    run("jet-cont", 2, {"-z2 - 1.5*z1^2 - 0.5*z1^3", "-z2 + z1"}, 4);
    run("jet-cont", 2, {"-z2 - 1.5*z1^2 - 0.5*z1^3", "-z2 + z1"}, 6);
    run("ex1-cont", 1, {"-z1^3 + 2*z1^2 - 1.1*z1"}, 4);
    return 0;
}
