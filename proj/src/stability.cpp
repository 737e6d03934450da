#include "sampcert/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace sampcert {

namespace {

constexpr double kIdentityTol = 1e-6;   // relative, re-expanded identities
constexpr double kGramTol = 1e-8;       // eigenvalue floor, scaled by trace

std::string zname(int i) { return "z" + std::to_string(i + 1); }
std::string xname(int i) { return "x" + std::to_string(i + 1); }

std::vector<bool> z_only_mask(const VarSet& vars, int n) {
    std::vector<bool> mask(vars.size(), false);
    for (int i = 0; i < n; ++i) mask[static_cast<std::size_t>(1 + n + i)] = true;
    return mask;
}

Polynomial z_norm_squared(const VarSetPtr& vars, int n) {
    Polynomial out = Polynomial::zero(vars);
    for (int i = 0; i < n; ++i) out += Polynomial::variable(vars, zname(i)).pow(2);
    return out;
}

std::vector<Polynomial> embedded_dynamics(const SystemDef& system, const VarSetPtr& vars) {
    std::vector<Polynomial> f;
    f.reserve(system.f.size());
    for (const auto& fi : system.f) f.push_back(fi.embedded(vars));
    return f;
}

std::map<std::string, Polynomial> z_to_x_bindings(const VarSetPtr& vars, int n) {
    std::map<std::string, Polynomial> bindings;
    for (int i = 0; i < n; ++i)
        bindings.emplace(zname(i), Polynomial::variable(vars, xname(i)));
    return bindings;
}

/// True when the monomial involves only the time variables: indices 1..2n
/// hold the state and held-state variables.
bool time_only(const Monomial& m, int n) {
    for (int i = 0; i < 2 * n; ++i)
        if (m.exponent(static_cast<std::size_t>(1 + i)) > 0) return false;
    return true;
}

std::vector<Monomial> drop_time_only(std::vector<Monomial> basis, int n) {
    std::erase_if(basis, [n](const Monomial& m) { return time_only(m, n); });
    return basis;
}

/// Localizing polynomials for the in-interval (and in-period-range)
/// constraints of the decrease identity.
std::vector<Polynomial> localizers_for(const StabilityQuery& q, const VarSetPtr& vars) {
    Polynomial t = Polynomial::variable(vars, "t");
    std::vector<Polynomial> gs;
    if (q.mode == Mode::Synchronous) {
        gs.push_back(t * (Polynomial::constant(vars, q.T) - t));
    } else {
        Polynomial T = Polynomial::variable(vars, "T");
        gs.push_back(t * (T - t));
        gs.push_back((T - Polynomial::constant(vars, q.T_min)) *
                     (Polynomial::constant(vars, q.T_max) - T));
    }
    return gs;
}

StabilityEncoding build_encoding(const StabilityQuery& q) {
    q.validate();
    const int n = static_cast<int>(q.system.n);
    const int N = q.degree;
    VarSetPtr vars = certificate_varset(n, q.mode);
    const auto zmask = z_only_mask(*vars, n);
    const Polynomial z2 = z_norm_squared(vars, n);
    const std::vector<Polynomial> f = embedded_dynamics(q.system, vars);

    // On any feasible point the time-only slices vanish: when the origin is an
    // equilibrium, the decrease inequality at x = z = 0 says e^{2*alpha*t} *
    // F(t,0,0) is non-increasing in t, while the endpoint identity makes its
    // two interval ends equal; the slice is therefore constant, the inequality
    // tight, and — being a sum of nonnegative terms — each multiplier vanishes
    // at x = z = 0, so its Gram block over time-only monomials is zero, as are
    // F's time-only coefficients. Dropping those basis elements keeps every
    // certificate and restores the strict interior the solver needs. In
    // asynchronous mode the endpoint discount matches the decrease rate only
    // at alpha = 0, so the argument is restricted to that case there.
    bool origin_equilibrium = true;
    for (const auto& fi : f)
        if (fi.coefficient(Monomial::one(vars->size())) != 0.0) origin_equilibrium = false;
    const bool prune_time_only =
        origin_equilibrium && (q.mode == Mode::Synchronous || q.alpha == 0.0);

    SosProgram prog;
    const int vlo = std::getenv("SAMPCERT_V_FULL") ? 0 : 2;
    DecisionPoly V = prog.new_decision_poly(vars, monomials_in_degrees(*vars, vlo, N, &zmask));
    DecisionPoly F = prune_time_only
                         ? prog.new_decision_poly(
                               vars, drop_time_only(monomials_in_degrees(*vars, 0, N), n))
                         : prog.new_decision_poly(vars, N);
    SosPoly lower = prog.new_sos_poly(vars, monomials_in_degrees(*vars, 1, N / 2, &zmask));

    // Positivity of the storage function: V - mu1*||z||^2 is SOS.
    prog.assert_poly_eq(V.expr() - LinearPoly::from_poly(z2 * q.mu1), lower.expr());

    // Decrease of V + F along dynamics, strict by the eps margin, localized
    // to t in [0, T] (and T in [T_min, T_max] in asynchronous mode).
    LinearPoly lhs(vars);
    for (int i = 0; i < n; ++i) {
        lhs += V.expr().derivative(zname(i)).times(f[static_cast<std::size_t>(i)]);
        lhs += F.expr().derivative(zname(i)).times(f[static_cast<std::size_t>(i)]);
    }
    lhs += F.expr().derivative("t");
    if (q.alpha != 0.0) lhs += (V.expr() + F.expr()) * (2.0 * q.alpha);
    lhs += LinearPoly::from_poly(z2 * q.eps);

    const std::vector<Polynomial> gs = localizers_for(q, vars);
    SosProgram::PsatzHandles multipliers;
    if (prune_time_only) {
        // Same multiplier degrees psatz_combine would pick, with the time-only
        // half-basis monomials removed.
        const LinearPoly target = -lhs;
        const int dt = target.degree().value_or(0);
        auto even_ceil = [](int d) { return d <= 0 ? 0 : d + (d % 2); };
        // A multiplier whose basis prunes away is identically zero on every
        // feasible point; represent it as a detached zero term.
        auto sos_or_zero = [&](std::vector<Monomial> hb) {
            return hb.empty() ? SosPoly{vars, {}, -1, {}}
                              : prog.new_sos_poly(vars, std::move(hb));
        };
        multipliers.s0 =
            sos_or_zero(drop_time_only(monomials_in_degrees(*vars, 0, even_ceil(dt) / 2), n));
        LinearPoly combo = multipliers.s0.expr();
        for (const Polynomial& g : gs) {
            const int di = even_ceil(dt - g.degree().value_or(0));
            SosPoly si =
                sos_or_zero(drop_time_only(monomials_in_degrees(*vars, 0, di / 2), n));
            combo += si.expr().times(g);
            multipliers.s.push_back(std::move(si));
        }
        prog.assert_poly_eq(target, combo);
    } else {
        multipliers = prog.psatz_combine(-lhs, gs);
    }

    // Interval-endpoint identity for F.
    const auto z_to_x = z_to_x_bindings(vars, n);
    if (q.mode == Mode::Synchronous) {
        LinearPoly end = F.expr().substitute_values({{"t", q.T}});
        LinearPoly start = F.expr().substitute_values({{"t", 0.0}}).substitute(z_to_x) *
                           std::exp(-2.0 * q.alpha * q.T);
        prog.assert_poly_eq(end, start);
    } else {
        std::map<std::string, Polynomial> t_to_T{{"t", Polynomial::variable(vars, "T")}};
        LinearPoly end = F.expr().substitute(t_to_T);
        LinearPoly start = F.expr().substitute_values({{"t", 0.0}}).substitute(z_to_x) *
                           std::exp(-2.0 * q.alpha * q.T_max);
        prog.assert_poly_eq(end, start);
    }

    // Scale normalization; the identities admit coordinated upscaling, so pin
    // the storage witness trace.
    if (!std::getenv("SAMPCERT_NO_TRACE"))
        prog.assert_poly_eq(lower.trace(),
                            LinearPoly::from_poly(Polynomial::constant(vars, 1.0)));

    StabilityEncoding enc{vars,  std::move(prog), V, F, lower, multipliers.s0,
                          multipliers.s[0], std::nullopt};
    if (q.mode == Mode::Asynchronous) enc.s2 = multipliers.s[1];
    return enc;
}

Certificate extract_certificate(const StabilityQuery& q, const StabilityEncoding& enc,
                                const CompiledProgram& compiled,
                                const ConicSolution& sol) {
    const std::vector<double> vals = compiled.extract(sol);
    Certificate cert;
    cert.query = q;
    cert.vars = enc.vars;
    cert.V = enc.V.value(vals);
    cert.F = enc.F.value(vals);
    cert.lower = SosTerm{enc.lower.half_basis, enc.lower.gram(vals)};
    cert.s0 = SosTerm{enc.s0.half_basis, enc.s0.gram(vals)};
    cert.s1 = SosTerm{enc.s1.half_basis, enc.s1.gram(vals)};
    if (enc.s2) cert.s2 = SosTerm{enc.s2->half_basis, enc.s2->gram(vals)};
    cert.solver_iterations = sol.iterations;
    cert.solver_residual = std::max(sol.primal_residual, sol.dual_residual);
    cert.solver_gap = sol.gap;
    return cert;
}

struct ResidualProbe {
    double relative = 0.0;
    std::string worst;  // monomial of the largest coefficient mismatch
};

ResidualProbe probe_residual(const Polynomial& diff, double scale) {
    ResidualProbe out;
    double best = 0.0;
    for (const auto& [m, c] : diff.terms())
        if (std::abs(c) > best) {
            best = std::abs(c);
            out.worst = to_string(m, *diff.varset());
        }
    out.relative = best / scale;
    return out;
}

double coeff_scale(std::initializer_list<const Polynomial*> polys) {
    double s = 1.0;
    for (const Polynomial* p : polys) s = std::max(s, p->max_abs_coefficient());
    return s;
}

/// min-eigenvalue check for one Gram; returns false and fills the report's
/// failure on violation (or asymmetry).
bool gram_ok(const SosTerm& term, const char* label, VerificationReport& rep) {
    double tol = kGramTol * std::max(1.0, std::abs(term.gram.trace()));
    try {
        auto [ok, mineig] = check_psd(term.gram, tol);
        rep.min_gram_eigenvalue = std::min(rep.min_gram_eigenvalue, mineig);
        if (!ok) {
            std::ostringstream os;
            os << "Gram matrix for " << label << " is not positive semidefinite"
               << " (min eigenvalue " << mineig << ")";
            rep.failure = os.str();
            return false;
        }
        return true;
    } catch (const std::exception& e) {
        rep.failure = std::string("Gram matrix for ") + label + ": " + e.what();
        return false;
    }
}

}  // namespace

const char* to_string(Mode m) {
    return m == Mode::Synchronous ? "synchronous" : "asynchronous";
}

const char* to_string(CertifyStatus s) {
    switch (s) {
        case CertifyStatus::Certified: return "certified";
        case CertifyStatus::Infeasible: return "infeasible";
        case CertifyStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

Certificate::Certificate()
    : V(Polynomial::zero(VarSet::create({}))), F(Polynomial::zero(V.varset())) {}

Polynomial SosTerm::poly(const VarSetPtr& vars) const {
    return gram_to_poly(vars, half_basis, gram);
}

void StabilityQuery::validate() const {
    if (system.n < 1) throw std::invalid_argument("system dimension must be at least 1");
    if (system.f.size() != system.n)
        throw std::invalid_argument("system has wrong number of dynamics entries");
    if (degree < 2 || degree % 2 != 0)
        throw std::invalid_argument("degree must be an even integer >= 2, got " +
                                    std::to_string(degree));
    if (!(mu1 > 0.0)) throw std::invalid_argument("mu1 must be positive");
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be non-negative");
    if (mode == Mode::Synchronous) {
        if (!(T > 0.0)) throw std::invalid_argument("synchronous period T must be positive");
    } else {
        if (!(T_min >= 0.0)) throw std::invalid_argument("T_min must be non-negative");
        if (!(T_max > T_min))
            throw std::invalid_argument("need T_min < T_max (degenerate range: use "
                                        "synchronous mode)");
    }
}

VarSetPtr certificate_varset(int n, Mode mode) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(2 * n + 2));
    names.emplace_back("t");
    for (int i = 0; i < n; ++i) names.push_back(xname(i));
    for (int i = 0; i < n; ++i) names.push_back(zname(i));
    if (mode == Mode::Asynchronous) names.emplace_back("T");
    return VarSet::create(std::move(names));
}

StabilityEncoding encode_synchronous(const StabilityQuery& query) {
    if (query.mode != Mode::Synchronous)
        throw std::invalid_argument("query mode is not synchronous");
    return build_encoding(query);
}

StabilityEncoding encode_asynchronous(const StabilityQuery& query) {
    if (query.mode != Mode::Asynchronous)
        throw std::invalid_argument("query mode is not asynchronous");
    return build_encoding(query);
}

StabilityEncoding encode(const StabilityQuery& query) { return build_encoding(query); }

VerificationReport verify_certificate(const Certificate& cert) {
    VerificationReport rep;
    const StabilityQuery& q = cert.query;
    try {
        q.validate();
    } catch (const std::exception& e) {
        rep.failure = std::string("invalid query: ") + e.what();
        return rep;
    }
    const int n = static_cast<int>(q.system.n);
    if (!cert.vars || *cert.vars != *certificate_varset(n, q.mode)) {
        rep.failure = "certificate variable set does not match the query";
        return rep;
    }
    const bool async = q.mode == Mode::Asynchronous;
    if (async != cert.s2.has_value()) {
        rep.failure = async ? "missing period-range multiplier s2"
                            : "unexpected multiplier s2 in synchronous mode";
        return rep;
    }
    if (auto dv = cert.V.degree(); dv && *dv > q.degree) {
        rep.failure = "V exceeds the declared degree";
        return rep;
    }

    rep.min_gram_eigenvalue = 0.0;
    if (!gram_ok(cert.lower, "the storage lower bound", rep)) return rep;
    if (!gram_ok(cert.s0, "s0", rep)) return rep;
    if (!gram_ok(cert.s1, "s1", rep)) return rep;
    if (cert.s2 && !gram_ok(*cert.s2, "s2", rep)) return rep;

    const VarSetPtr& vars = cert.vars;
    const Polynomial z2 = z_norm_squared(vars, n);

    try {
        // Storage lower bound: V - mu1*||z||^2 == lower Gram expansion.
        {
            Polynomial expanded = cert.lower.poly(vars);
            Polynomial target = cert.V - z2 * q.mu1;
            auto probe =
                probe_residual(target - expanded, coeff_scale({&target, &expanded}));
            rep.lower_residual = probe.relative;
            if (probe.relative > kIdentityTol) {
                rep.failure =
                    "storage lower-bound identity residual " + shortest_repr(probe.relative) +
                    " at monomial " + probe.worst;
                return rep;
            }
        }

        // Decrease identity along the dynamics.
        {
            const std::vector<Polynomial> f = embedded_dynamics(q.system, vars);
            Polynomial lhs = Polynomial::zero(vars);
            for (int i = 0; i < n; ++i) {
                lhs += cert.V.derivative(zname(i)) * f[static_cast<std::size_t>(i)];
                lhs += cert.F.derivative(zname(i)) * f[static_cast<std::size_t>(i)];
            }
            lhs += cert.F.derivative("t");
            if (q.alpha != 0.0) lhs += (cert.V + cert.F) * (2.0 * q.alpha);
            lhs += z2 * q.eps;

            const std::vector<Polynomial> gs = localizers_for(q, vars);
            Polynomial combo = cert.s0.poly(vars) + cert.s1.poly(vars) * gs[0];
            if (cert.s2) combo += cert.s2->poly(vars) * gs[1];

            auto probe = probe_residual(lhs + combo, coeff_scale({&lhs, &combo}));
            rep.identity_residual = probe.relative;
            if (probe.relative > kIdentityTol) {
                rep.failure = "decrease identity residual " + shortest_repr(probe.relative) +
                              " at monomial " + probe.worst;
                return rep;
            }
        }

        // Interval-endpoint identity for F.
        {
            Polynomial end = Polynomial::zero(vars);
            Polynomial start = Polynomial::zero(vars);
            const auto z_to_x = z_to_x_bindings(vars, n);
            if (!async) {
                end = cert.F.substitute_values({{"t", q.T}});
                start = cert.F.substitute_values({{"t", 0.0}}).substitute(z_to_x) *
                        std::exp(-2.0 * q.alpha * q.T);
            } else {
                std::map<std::string, Polynomial> t_to_T{
                    {"t", Polynomial::variable(vars, "T")}};
                end = cert.F.substitute(t_to_T);
                start = cert.F.substitute_values({{"t", 0.0}}).substitute(z_to_x) *
                        std::exp(-2.0 * q.alpha * q.T_max);
            }
            auto probe = probe_residual(end - start, coeff_scale({&end, &start}));
            rep.boundary_residual = probe.relative;
            if (probe.relative > kIdentityTol) {
                rep.failure = "endpoint identity residual " + shortest_repr(probe.relative) +
                              " at monomial " + probe.worst;
                return rep;
            }
        }
    } catch (const std::exception& e) {
        rep.failure = std::string("verification could not re-expand identities: ") + e.what();
        return rep;
    }

    rep.pass = true;
    return rep;
}

CertifyOutcome certify(const StabilityQuery& query, const SolverOptions& options) {
    StabilityEncoding enc = encode(query);
    CompiledProgram compiled = enc.program.compile();
    ConicSolution sol = solve(compiled.problem, options);

    CertifyOutcome out;
    out.solver_status = sol.status;
    out.iterations = sol.iterations;

    // Verification is the arbiter: any solver iterate that re-checks becomes a
    // certificate, whatever the reported status.
    auto accept = [&](const ConicSolution& s) {
        if (s.X.empty()) return false;
        Certificate cert = extract_certificate(query, enc, compiled, s);
        out.report = verify_certificate(cert);
        if (!out.report.pass) return false;
        out.status = CertifyStatus::Certified;
        out.certificate = std::move(cert);
        out.message = "certificate verified";
        return true;
    };

    if (sol.status == SolveStatus::Feasible && accept(sol)) return out;
    if (sol.status == SolveStatus::Infeasible) {
        out.status = CertifyStatus::Infeasible;
        out.ray_error = sol.ray_error;
        out.message = "no certificate at this degree: " + sol.message;
        return out;
    }

    // The plain solve failed (or its iterate did not verify). Certificates of
    // sampled-data stability routinely fill a set with empty relative
    // interior, where no central path exists; maximizing the smallest Gram
    // margin restores an interior and aims at the most interior certificate.
    ConicSolution retry = solve_max_margin(compiled.problem, options);
    out.solver_status = retry.status;
    out.iterations += retry.iterations;
    if (retry.status != SolveStatus::Infeasible && accept(retry)) return out;

    if (retry.status == SolveStatus::Infeasible) {
        out.status = CertifyStatus::Infeasible;
        out.ray_error = retry.ray_error;
        out.message = "no certificate at this degree: " + retry.message;
    } else {
        out.status = CertifyStatus::Inconclusive;
        out.message = std::string("solver did not reach the requested accuracy (") +
                      retry.message + ")";
        if (!out.report.pass && !out.report.failure.empty())
            out.message += "; closest iterate failed verification: " + out.report.failure;
    }
    return out;
}

MaxPeriodResult max_sampling_period(const StabilityQuery& base, double T_lo, double T_hi,
                                    double resolution, const SolverOptions& options) {
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    if (!(T_hi > T_lo)) throw std::invalid_argument("need T_lo < T_hi");
    if (T_lo < 0.0) throw std::invalid_argument("T_lo must be non-negative");
    if (base.mode == Mode::Asynchronous && T_lo > 0.0 && T_lo <= base.T_min)
        throw std::invalid_argument("T_lo must exceed T_min in asynchronous mode");

    auto probe = [&](double T) {
        StabilityQuery q = base;
        if (q.mode == Mode::Synchronous)
            q.T = T;
        else
            q.T_max = T;
        return certify(q, options);
    };

    MaxPeriodResult res;
    double lo = T_lo, hi = T_hi;
    if (T_lo > 0.0) {
        CertifyOutcome out = probe(T_lo);
        ++res.probes;
        if (out.status != CertifyStatus::Certified) return res;  // nothing certifiable
        res.found = true;
        res.T_star = T_lo;
        res.certificate = std::move(out.certificate);
    }
    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        CertifyOutcome out = probe(mid);
        ++res.probes;
        if (out.status == CertifyStatus::Certified) {
            lo = mid;
            res.found = true;
            res.T_star = mid;
            res.certificate = std::move(out.certificate);
        } else {
            hi = mid;  // infeasible and inconclusive both shrink from above
        }
    }
    return res;
}

}  // namespace sampcert
