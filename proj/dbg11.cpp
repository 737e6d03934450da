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
    const auto t0 = std::chrono::steady_clock::now();
    CertifyOutcome out = certify(q);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("jet T=%.4f N=%d: %s (%d iters, %.1fs) %s\n", T, N, to_string(out.status),
                out.iterations, secs, out.message.c_str());
    return out.status == CertifyStatus::Certified ? 0 : 1;
}
