#include "sampcert/stability.hpp"
#include <cstdio>
using namespace sampcert;

int main(int argc, char** argv) {
    StabilityQuery c;
    const int sys = argc > 3 ? std::atoi(argv[3]) : 1;
    if (sys == 2)
        c.system = make_system("ex2", 2, {"-xk2 - 1.5*z1^2 - 0.5*z1^3", "-z2 + z1"});
    else
        c.system = make_system("cubic", 1, {"-z1^3 + 2*z1^2 - 1.1*xk1"});
    c.T = argc > 1 ? std::atof(argv[1]) : 0.5;
    c.degree = argc > 2 ? std::atoi(argv[2]) : 4;
    StabilityEncoding enc = encode(c);
    auto compiled = enc.program.compile();
    SolverOptions opt;
    opt.verbose = true;
    auto sol = solve_max_margin(compiled.problem, opt);
    std::printf("status=%s iters=%d relp=%.2e msg=%s\n", to_string(sol.status),
                sol.iterations, sol.primal_residual, sol.message.c_str());
    std::vector<double> vals = compiled.extract(sol);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(enc.s0.gram(vals));
    std::printf("s0 min eig %.3e\n", es.eigenvalues().minCoeff());
    return 0;
}
