#include "sampcert/stability.hpp"
#include <cstdio>
using namespace sampcert;

static void report(const char* tag, const CertifyOutcome& out) {
    std::printf("%s: status=%s solver=%s iters=%d ray=%.3g\n  msg=%s\n", tag,
                to_string(out.status), to_string(out.solver_status), out.iterations,
                out.ray_error, out.message.c_str());
    std::printf("  report: pass=%d id=%.3g bd=%.3g low=%.3g eig=%.3g fail=%s\n",
                (int)out.report.pass, out.report.identity_residual,
                out.report.boundary_residual, out.report.lower_residual,
                out.report.min_gram_eigenvalue, out.report.failure.c_str());
}

int main() {
    StabilityQuery q;
    q.system = make_system("lin", 1, {"-xk1"});
    q.T = 1.0;
    q.degree = 2;
    report("linear T=1 N=2", certify(q));

    q.degree = 4;
    report("linear T=1 N=4", certify(q));

    StabilityQuery c;
    c.system = make_system("cubic", 1, {"-z1^3 + 2*z1^2 - 1.1*xk1"});
    c.T = 0.5;
    c.degree = 4;
    report("cubic T=0.5 N=4", certify(c));
    return 0;
}
