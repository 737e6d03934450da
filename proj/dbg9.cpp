#include "sampcert/stability.hpp"
#include <cstdio>
using namespace sampcert;

int main(int argc, char** argv) {
    StabilityQuery c;
    const int sys = argc > 3 ? std::atoi(argv[3]) : 2;
    if (sys == 2)
        c.system = make_system("ex2", 2, {"-xk2 - 1.5*z1^2 - 0.5*z1^3", "-z2 + z1"});
    else
        c.system = make_system("cubic", 1, {"-z1^3 + 2*z1^2 - 1.1*xk1"});
    c.T = argc > 1 ? std::atof(argv[1]) : 0.16;
    c.degree = argc > 2 ? std::atoi(argv[2]) : 4;
    StabilityEncoding enc = encode(c);
    auto compiled = enc.program.compile();
    SolverOptions opt;
    auto sol = solve_max_margin(compiled.problem, opt);
    std::printf("status=%s iters=%d msg=%s\n", to_string(sol.status), sol.iterations,
                sol.message.c_str());
    for (std::size_t j = 0; j < compiled.problem.blocks.size(); ++j) {
        if (compiled.problem.blocks[j].kind != BlockKind::Psd) continue;
        if (sol.S[j].rows() == 0) {
            std::printf("block %zu (n=%d): S empty\n", j, compiled.problem.blocks[j].size);
            continue;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esS(sol.S[j]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esX(sol.X[j]);
        std::printf("block %zu (n=%d):\n  S eigs:", j, compiled.problem.blocks[j].size);
        for (int k = 0; k < esS.eigenvalues().size(); ++k)
            std::printf(" %.2e", esS.eigenvalues()[k]);
        std::printf("\n  X eigs:");
        for (int k = 0; k < esX.eigenvalues().size(); ++k)
            std::printf(" %.2e", esX.eigenvalues()[k]);
        std::printf("\n");
    }
    return 0;
}
