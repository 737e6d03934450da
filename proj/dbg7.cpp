#include "sampcert/stability.hpp"
#include <cstdio>
using namespace sampcert;

int main(int argc, char** argv) {
    const int deg = argc > 1 ? std::atoi(argv[1]) : 4;
    StabilityQuery q;
    q.system = make_system("ex1", 1, {"-z1^3 + 2*z1^2 - 1.1*xk1"});
    q.degree = deg;
    for (double T : {0.40, 0.469, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.79, 0.82, 0.90}) {
        q.T = T;
        CertifyOutcome out = certify(q);
        std::printf("T=%.3f: %-13s iters=%3d  %s\n", T, to_string(out.status), out.iterations,
                    out.message.c_str());
    }
    return 0;
}
