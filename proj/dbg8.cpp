#include "sampcert/stability.hpp"
#include <cstdio>
using namespace sampcert;

int main() {
    struct Probe {
        const char* tag;
        SystemDef sys;
        double T;
        double eps;
    };
    const Probe probes[] = {
        {"jet eps=0  ", make_system("jet", 2, {"-xk2 - 1.5*z1^2 - 0.5*z1^3", "-z2 + z1"}), 0.05,
         0.0},
        {"jet quad   ", make_system("jq", 2, {"-xk2 - 1.5*z1^2", "-z2 + z1"}), 0.05, 1e-6},
        {"jet cubic  ", make_system("jc", 2, {"-xk2 - 0.5*z1^3", "-z2 + z1"}), 0.05, 1e-6},
        {"cube2d     ", make_system("c2", 2, {"-z1^3 - 1.1*xk1", "-z2"}), 0.05, 1e-6},
        {"cube2d-cpl ", make_system("c3", 2, {"-z1^3 - 1.1*xk2", "-z2 + z1"}), 0.05, 1e-6},
        {"quad2d     ", make_system("q2", 2, {"-z1 + 2*z1^2 - 1.1*xk1", "-z2"}), 0.05, 1e-6},
    };
    for (const auto& p : probes) {
        StabilityQuery q;
        q.system = p.sys;
        q.T = p.T;
        q.degree = 4;
        q.eps = p.eps;
        CertifyOutcome out = certify(q);
        std::printf("%s T=%.2f: %-13s %s\n", p.tag, p.T, to_string(out.status),
                    out.message.c_str());
    }
    return 0;
}
