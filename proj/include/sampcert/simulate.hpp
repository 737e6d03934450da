#pragma once

#include "sampcert/expr.hpp"
#include "sampcert/stability.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace sampcert {

/// How the sampling instants t_{k+1} = t_k + T_k are generated.
struct SamplingSchedule {
    enum class Kind { Fixed, Sequence, RandomUniform };

    Kind kind = Kind::Fixed;
    double T = 0.0;                  // Fixed
    std::vector<double> periods;     // Sequence
    double T_min = 0.0, T_max = 0.0; // RandomUniform bounds
    std::uint64_t seed = 0;

    static SamplingSchedule fixed(double T);
    static SamplingSchedule sequence(std::vector<double> periods);
    static SamplingSchedule random_uniform(double T_min, double T_max, std::uint64_t seed);

    /// Concrete T_1..T_K; reproducible from the seed for RandomUniform.
    /// Throws std::invalid_argument on non-positive periods or bad bounds.
    std::vector<double> realize(int count) const;
};

/// Integration record: one row per Runge-Kutta substep endpoint (plus the
/// initial state), each tagged with the sampling interval it belongs to.
/// t_{k+1} rows carry interval k, so interval-end functional values are
/// well defined; the next interval starts at its first substep.
struct SimTrace {
    int n = 0;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<int> interval;             // k per row
    std::vector<double> sample_instants;   // t_0 .. t_K
    std::vector<Eigen::VectorXd> held;     // x(t_k) per started interval
    std::vector<double> periods;           // T_k per started interval
    bool overflow = false;
    double overflow_time = 0.0;
};

/// Integrate ẋ = f(x(t), x(t_k)) with classical 4th-order Runge-Kutta,
/// holding x(t_k) constant inside each interval; the final substep is
/// shortened to land exactly on t_{k+1}. step <= 0 selects T_k/200 per
/// interval; an explicit step must satisfy 0 < step <= min T_k / 10.
/// Integration aborts (overflow flag + time) once |x| > 1e9.
SimTrace simulate(const SystemDef& system, const Eigen::VectorXd& x0,
                  const SamplingSchedule& schedule, int periods, double step = 0.0);

/// V, Q, and V+Q along a trace, where Q(t) = F(t - t_k, x(t_k), x(t))
/// (asynchronous: with T = T_k). boundary_gap is the worst interval-endpoint
/// mismatch |Q(T_k) - e^{-2 alpha T_k} Q(0)| relative to max(1, |Q|).
struct TraceFunctionals {
    std::vector<double> V, Q, VplusQ;  // one entry per trace row
    double boundary_gap = 0.0;
};

/// Throws std::invalid_argument when certificate and trace dimensions differ.
TraceFunctionals trace_functionals(const SimTrace& trace, const Certificate& cert);

/// CSV: header t,x1..xn,k plus V,Q,VplusQ columns when functionals are given;
/// one row per trace row. Deterministic shortest round-trip formatting.
void write_trace_csv(std::ostream& out, const SimTrace& trace,
                     const TraceFunctionals* functionals = nullptr);

/// Interval flow map for linear dynamics ẋ = A0 x + A1 x(t_k):
/// x(t_k + s) = Gamma(s) x(t_k), computed from the matrix exponential of the
/// augmented [[A0, A1], [0, 0]]. Requires s >= 0 and square same-size blocks.
Eigen::MatrixXd linear_flow_map(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& A1,
                                double s);

/// Largest T with spectral radius of Gamma(T) < 1, bisected to the given
/// resolution; exact stability oracle for linear systems. Throws
/// std::runtime_error when no stable period exists at the smallest probe or
/// no unstable period is found while doubling the bracket.
double linear_max_T(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& A1,
                    double resolution);

}  // namespace sampcert
