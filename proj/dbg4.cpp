#include "sampcert/stability.hpp"
#include <cstdio>
using namespace sampcert;

static void block_report(const char* name, const SosPoly& s, const Eigen::MatrixXd& X,
                         const VarSet& vars) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
    std::printf("%s (dim %d): eigs", name, (int)X.rows());
    for (int i = 0; i < std::min<int>(5, X.rows()); ++i)
        std::printf(" %.2e", es.eigenvalues()(i));
    std::printf("\n");
    for (int k = 0; k < X.rows(); ++k) {
        if (es.eigenvalues()(k) > 1e-5) break;
        std::printf("  null vec (eig %.1e):", es.eigenvalues()(k));
        for (int i = 0; i < X.rows(); ++i)
            if (std::abs(es.eigenvectors()(i, k)) > 0.05)
                std::printf(" %+.3f*%s", es.eigenvectors()(i, k),
                            to_string(s.half_basis[(std::size_t)i], vars).c_str());
        std::printf("\n");
    }
}

int main(int argc, char** argv) {
    StabilityQuery c;
    c.system = make_system("cubic", 1, {"-z1^3 + 2*z1^2 - 1.1*xk1"});
    c.T = argc > 1 ? std::atof(argv[1]) : 0.5;
    c.degree = argc > 2 ? std::atoi(argv[2]) : 4;
    StabilityEncoding enc = encode(c);
    auto compiled = enc.program.compile();
    std::printf("rows=%d unknowns=%d blocks:", compiled.problem.num_rows(),
                enc.program.unknown_count());
    for (const auto& b : compiled.problem.blocks)
        std::printf(" %s%d", b.kind == BlockKind::Free ? "f" : "p", b.size);
    std::printf("\n");
    SolverOptions opt;
    opt.verbose = std::getenv("DBG_VERBOSE") != nullptr;
    auto sol = solve(compiled.problem, opt);
    std::printf("status=%s iters=%d msg=%s\n", to_string(sol.status), sol.iterations,
                sol.message.c_str());
    std::vector<double> vals = compiled.extract(sol);
    block_report("lower", enc.lower, enc.lower.gram(vals), *enc.vars);
    block_report("s0", enc.s0, enc.s0.gram(vals), *enc.vars);
    block_report("s1", enc.s1, enc.s1.gram(vals), *enc.vars);
    // Dual side: S-block spectra tell which constraints pinch.
    for (std::size_t b = 0; b < sol.S.size(); ++b) {
        if (compiled.problem.blocks[b].kind != BlockKind::Psd) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.S[b]);
        std::printf("S block %zu: min eig %.2e max %.2e\n", b, es.eigenvalues().minCoeff(),
                    es.eigenvalues().maxCoeff());
    }
    return 0;
}
