#include "sampcert/stability.hpp"
#include <chrono>
#include <cstdio>
#include <cstdlib>
using namespace sampcert;

int main(int argc, char** argv) {
    const double T = argc > 1 ? std::atof(argv[1]) : 0.45;
    const int N = argc > 2 ? std::atoi(argv[2]) : 6;
    StabilityQuery q;
    q.system = make_system("jet", 2, {"-xk2 - 1.5*z1^2 - 0.5*z1^3", "-z2 + z1"});
    q.T = T;
    q.degree = N;
    StabilityEncoding enc = encode(q);
    CompiledProgram cp = enc.program.compile();
    std::printf("rows m=%zu  blocks:", static_cast<std::size_t>(cp.problem.num_rows()));
    for (const auto& bs : cp.problem.blocks)
        std::printf(" %s%d", bs.kind == BlockKind::Psd ? "psd" : "free", bs.size);
    std::printf("\n");
    std::fflush(stdout);
    SolverOptions opt;
    opt.verbose = true;
    const auto t0 = std::chrono::steady_clock::now();
    ConicSolution sol = solve(cp.problem, opt);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("plain solve: %s %d iters %.1fs relp=%.2e msg=%s\n", to_string(sol.status),
                sol.iterations, secs, sol.primal_residual, sol.message.c_str());
    return 0;
}
