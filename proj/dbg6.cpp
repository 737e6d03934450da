#include "sampcert/stability.hpp"
#include <chrono>
#include <cstdio>
using namespace sampcert;

static double now() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

int main(int argc, char** argv) {
    const int which = argc > 1 ? std::atoi(argv[1]) : 0;
    auto report = [](const char* tag, const MaxPeriodResult& r, double t0) {
        std::printf("%s: found=%d T*=%.4f probes=%d  (%.1fs)\n", tag, r.found, r.T_star,
                    r.probes, now() - t0);
    };
    if (which == 1) {
        StabilityQuery q;
        q.system = make_system("ex1", 1, {"-z1^3 + 2*z1^2 - 1.1*xk1"});
        q.degree = 4;
        double t0 = now();
        report("ex1 N4", max_sampling_period(q, 0.0, 5.0, 1e-3), t0);
        q.degree = 6;
        t0 = now();
        report("ex1 N6", max_sampling_period(q, 0.0, 5.0, 1e-3), t0);
    } else if (which == 2) {
        StabilityQuery q;
        q.system = make_system("ex2", 2, {"-xk2 - 1.5*z1^2 - 0.5*z1^3", "-z2 + z1"});
        q.degree = 4;
        for (double T : {0.16, 0.19}) {
            double t0 = now();
            CertifyOutcome out = certify(StabilityQuery{q.system, Mode::Synchronous, T, 0, 0, 4});
            std::printf("ex2 N4 T=%.2f: %s (%.1fs) %s\n", T, to_string(out.status), now() - t0,
                        out.message.c_str());
        }
        double t0 = now();
        report("ex2 N4 max", max_sampling_period(q, 0.0, 1.0, 1e-3), t0);
    } else if (which == 3) {
        StabilityQuery q;
        q.system = make_system("ex2", 2, {"-xk2 - 1.5*z1^2 - 0.5*z1^3", "-z2 + z1"});
        q.degree = 6;
        for (double T : {0.45, 0.48}) {
            double t0 = now();
            CertifyOutcome out = certify(StabilityQuery{q.system, Mode::Synchronous, T, 0, 0, 6});
            std::printf("ex2 N6 T=%.2f: %s (%.1fs) %s\n", T, to_string(out.status), now() - t0,
                        out.message.c_str());
        }
        double t0 = now();
        report("ex2 N6 max", max_sampling_period(q, 0.0, 1.0, 1e-3), t0);
    } else if (which == 4) {
        StabilityQuery q;
        q.system = make_system("ex3", 1, {"-z1^3 + 2*z1^2 - 1.1*xk1"});
        q.mode = Mode::Asynchronous;
        q.T_min = 0.0;
        q.T_max = 0.4;
        q.degree = 4;
        double t0 = now();
        report("ex3 async N4", max_sampling_period(q, 0.0, 5.0, 1e-3), t0);
        q.degree = 6;
        t0 = now();
        report("ex3 async N6", max_sampling_period(q, 0.0, 5.0, 1e-3), t0);
    }
    return 0;
}
