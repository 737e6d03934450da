#include "sampcert/simulate.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace sampcert {

namespace {

constexpr double kOverflowNorm = 1e9;

double spectral_radius(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Right-hand side of ẋ = f(x(t), x(t_k)); dynamics are polynomials over
/// (z1..zn, x1..xn) = (current state, held sample).
class HeldSampleField {
public:
    HeldSampleField(const SystemDef& system, int n) : system_(system), buf_(2 * n), n_(n) {}

    void set_held(const Eigen::VectorXd& held) {
        for (int i = 0; i < n_; ++i) buf_[static_cast<std::size_t>(n_ + i)] = held(i);
    }

    void eval(const Eigen::VectorXd& state, Eigen::VectorXd& out) {
        for (int i = 0; i < n_; ++i) buf_[static_cast<std::size_t>(i)] = state(i);
        for (int i = 0; i < n_; ++i)
            out(i) = system_.f[static_cast<std::size_t>(i)].eval(buf_);
    }

private:
    const SystemDef& system_;
    std::vector<double> buf_;
    int n_;
};

}  // namespace

SamplingSchedule SamplingSchedule::fixed(double T) {
    SamplingSchedule s;
    s.kind = Kind::Fixed;
    s.T = T;
    return s;
}

SamplingSchedule SamplingSchedule::sequence(std::vector<double> periods) {
    SamplingSchedule s;
    s.kind = Kind::Sequence;
    s.periods = std::move(periods);
    return s;
}

SamplingSchedule SamplingSchedule::random_uniform(double T_min, double T_max,
                                                  std::uint64_t seed) {
    SamplingSchedule s;
    s.kind = Kind::RandomUniform;
    s.T_min = T_min;
    s.T_max = T_max;
    s.seed = seed;
    return s;
}

std::vector<double> SamplingSchedule::realize(int count) const {
    if (count < 0) throw std::invalid_argument("negative period count");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    switch (kind) {
        case Kind::Fixed:
            if (!(T > 0.0)) throw std::invalid_argument("fixed period must be positive");
            out.assign(static_cast<std::size_t>(count), T);
            break;
        case Kind::Sequence:
            if (periods.size() < static_cast<std::size_t>(count))
                throw std::invalid_argument("schedule sequence shorter than requested count");
            out.assign(periods.begin(), periods.begin() + count);
            break;
        case Kind::RandomUniform: {
            if (!(T_min >= 0.0) || !(T_max > T_min))
                throw std::invalid_argument("need 0 <= T_min < T_max");
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> unif(T_min, T_max);
            for (int k = 0; k < count; ++k) out.push_back(unif(rng));
            break;
        }
    }
    for (double Tk : out)
        if (!(Tk > 0.0)) throw std::invalid_argument("sampling period must be positive");
    return out;
}

SimTrace simulate(const SystemDef& system, const Eigen::VectorXd& x0,
                  const SamplingSchedule& schedule, int periods, double step) {
    if (x0.size() != static_cast<Eigen::Index>(system.n))
        throw std::invalid_argument("x0 dimension mismatch");
    if (periods < 1) throw std::invalid_argument("need at least one sampling period");
    const std::vector<double> Ts = schedule.realize(periods);
    const double min_T = *std::min_element(Ts.begin(), Ts.end());
    if (step != 0.0) {
        if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
        if (step > min_T / 10.0 + 1e-15)
            throw std::invalid_argument("step must not exceed one tenth of the shortest period");
    }

    const int n = static_cast<int>(system.n);
    SimTrace trace;
    trace.n = n;
    trace.sample_instants.push_back(0.0);
    trace.times.push_back(0.0);
    trace.states.push_back(x0);
    trace.interval.push_back(0);

    HeldSampleField field(system, n);
    Eigen::VectorXd y = x0, k1(n), k2(n), k3(n), k4(n), tmp(n);

    for (int k = 0; k < periods && !trace.overflow; ++k) {
        const double t_k = trace.sample_instants.back();
        const double T_k = Ts[static_cast<std::size_t>(k)];
        trace.held.push_back(y);
        trace.periods.push_back(T_k);
        field.set_held(y);

        const double h_base = step > 0.0 ? step : T_k / 200.0;
        const int nsub = std::max(1, static_cast<int>(std::ceil(T_k / h_base - 1e-12)));
        for (int j = 1; j <= nsub; ++j) {
            // Last substep lands exactly on t_k + T_k.
            const double lo = (j - 1) * h_base;
            const double hi = j == nsub ? T_k : j * h_base;
            const double h = hi - lo;

            field.eval(y, k1);
            tmp = y + 0.5 * h * k1;
            field.eval(tmp, k2);
            tmp = y + 0.5 * h * k2;
            field.eval(tmp, k3);
            tmp = y + h * k3;
            field.eval(tmp, k4);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

            const double t = j == nsub ? t_k + T_k : t_k + hi;
            trace.times.push_back(t);
            trace.states.push_back(y);
            trace.interval.push_back(k);
            if (!y.allFinite() || y.norm() > kOverflowNorm) {
                trace.overflow = true;
                trace.overflow_time = t;
                break;
            }
        }
        if (!trace.overflow) trace.sample_instants.push_back(t_k + T_k);
    }
    return trace;
}

TraceFunctionals trace_functionals(const SimTrace& trace, const Certificate& cert) {
    if (cert.query.system.n != static_cast<std::size_t>(trace.n))
        throw std::invalid_argument("certificate dimension does not match trace");
    const int n = trace.n;
    const bool async = cert.query.mode == Mode::Asynchronous;
    const std::size_t nv = cert.vars->size();
    if (nv != static_cast<std::size_t>(2 * n + 1 + (async ? 1 : 0)))
        throw std::invalid_argument("certificate variable set has unexpected size");

    TraceFunctionals out;
    out.V.reserve(trace.times.size());
    out.Q.reserve(trace.times.size());
    out.VplusQ.reserve(trace.times.size());

    std::vector<double> buf(nv, 0.0);
    auto load = [&](double tau, const Eigen::VectorXd& held, const Eigen::VectorXd& state,
                    double T_k) {
        buf[0] = tau;
        for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(1 + i)] = held(i);
        for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(1 + n + i)] = state(i);
        if (async) buf[nv - 1] = T_k;
    };

    for (std::size_t r = 0; r < trace.times.size(); ++r) {
        const int k = trace.interval[r];
        const auto ks = static_cast<std::size_t>(k);
        const double tau = std::max(0.0, trace.times[r] - trace.sample_instants[ks]);
        load(tau, trace.held[ks], trace.states[r], trace.periods[ks]);
        const double v = cert.V.eval(buf);
        const double q = cert.F.eval(buf);
        out.V.push_back(v);
        out.Q.push_back(q);
        out.VplusQ.push_back(v + q);
    }

    // Endpoint identity per completed interval: Q(T_k)  vs  e^{-2aT_k} Q(0).
    const std::size_t completed = trace.sample_instants.size() - 1;
    std::size_t row = 0;
    for (std::size_t k = 0; k < completed; ++k) {
        while (row + 1 < trace.times.size() &&
               trace.interval[row + 1] == static_cast<int>(k))
            ++row;  // last row of interval k, at time t_{k+1}
        const double T_k = trace.periods[k];
        load(T_k, trace.held[k], trace.states[row], T_k);
        const double q_end = cert.F.eval(buf);
        load(0.0, trace.held[k], trace.held[k], T_k);
        const double q_start = cert.F.eval(buf);
        const double gap = std::abs(q_end - std::exp(-2.0 * cert.query.alpha * T_k) * q_start);
        const double scale = std::max({1.0, std::abs(q_start), std::abs(q_end)});
        out.boundary_gap = std::max(out.boundary_gap, gap / scale);
    }
    return out;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace,
                     const TraceFunctionals* functionals) {
    if (functionals && functionals->V.size() != trace.times.size())
        throw std::invalid_argument("functionals do not match trace length");
    out << "t";
    for (int i = 1; i <= trace.n; ++i) out << ",x" << i;
    out << ",k";
    if (functionals) out << ",V,Q,VplusQ";
    out << "\n";
    for (std::size_t r = 0; r < trace.times.size(); ++r) {
        out << shortest_repr(trace.times[r]);
        for (int i = 0; i < trace.n; ++i) out << "," << shortest_repr(trace.states[r](i));
        out << "," << trace.interval[r];
        if (functionals)
            out << "," << shortest_repr(functionals->V[r]) << ","
                << shortest_repr(functionals->Q[r]) << ","
                << shortest_repr(functionals->VplusQ[r]);
        out << "\n";
    }
}

Eigen::MatrixXd linear_flow_map(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& A1,
                                double s) {
    const Eigen::Index n = A0.rows();
    if (A0.cols() != n || A1.rows() != n || A1.cols() != n)
        throw std::invalid_argument("flow map needs square same-size A0, A1");
    if (s < 0.0) throw std::invalid_argument("flow map time must be non-negative");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = A0;
    M.topRightCorner(n, n) = A1;
    const Eigen::MatrixXd E = (M * s).exp();
    return E.topLeftCorner(n, n) + E.topRightCorner(n, n);
}

double linear_max_T(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& A1,
                    double resolution) {
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    auto stable = [&](double T) { return spectral_radius(linear_flow_map(A0, A1, T)) < 1.0; };

    double lo = std::min(resolution, 1e-3);
    if (!stable(lo))
        throw std::runtime_error("no stable sampling period found at the smallest probe");
    double hi = lo;
    do {
        hi *= 2.0;
        if (hi > 1e6)
            throw std::runtime_error(
                "bracket exhausted: spectral radius stays below 1 up to T = 1e6");
    } while (stable(hi));

    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        (stable(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace sampcert
