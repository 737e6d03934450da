#pragma once

#include "sampcert/expr.hpp"
#include "sampcert/sosprog.hpp"

#include <optional>
#include <string>

namespace sampcert {

enum class Mode { Synchronous, Asynchronous };

const char* to_string(Mode m);

/// One stability question: can dynamics f, sampled with the given timing,
/// be certified globally exponentially stable with decay rate alpha using
/// degree-N storage and spacing polynomials?
struct StabilityQuery {
    SystemDef system;
    Mode mode = Mode::Synchronous;
    double T = 0.0;                      // synchronous period
    double T_min = 0.0, T_max = 0.0;     // asynchronous period bounds
    int degree = 4;                      // N: total degree of V and F, even
    double alpha = 0.0;                  // decay rate
    double mu1 = 1e-2;                   // coefficient of ||z||^2 lower bound on V
    double eps = 1e-6;                   // strictness margin, coefficient of ||z||^2

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Numeric sum-of-squares witness: Gram matrix over a monomial half-basis.
struct SosTerm {
    std::vector<Monomial> half_basis;  // over the certificate variable set
    Eigen::MatrixXd gram;

    Polynomial poly(const VarSetPtr& vars) const;
};

/// Concrete stability certificate. Variables are ordered
/// (t, x1..xn, z1..zn) in synchronous mode and (t, x1..xn, z1..zn, T) in
/// asynchronous mode, where x is the held sample and z the current state.
struct Certificate {
    StabilityQuery query;
    VarSetPtr vars;
    Polynomial V;            // storage function; z-monomials only
    Polynomial F;            // spacing function over all variables
    SosTerm lower;           // witness for V - mu1*||z||^2
    SosTerm s0, s1;          // decrease-identity multipliers
    std::optional<SosTerm> s2;  // period-interval multiplier (asynchronous)

    int solver_iterations = 0;
    double solver_residual = 0.0;
    double solver_gap = 0.0;

    Certificate();  // V, F start as zero polynomials over an empty VarSet
};

struct VerificationReport {
    bool pass = false;
    double identity_residual = 0.0;   // decrease identity, relative to scale
    double boundary_residual = 0.0;   // endpoint identity, relative to scale
    double lower_residual = 0.0;      // V - mu1*||z||^2 re-expansion
    double min_gram_eigenvalue = 0.0; // most negative eigenvalue across Grams
    std::string failure;              // empty when pass; names the violation
};

/// Program plus the handles needed to read a certificate out of a solution.
struct StabilityEncoding {
    VarSetPtr vars;
    SosProgram program;
    DecisionPoly V;
    DecisionPoly F;
    SosPoly lower;
    SosPoly s0, s1;
    std::optional<SosPoly> s2;
};

StabilityEncoding encode_synchronous(const StabilityQuery& query);
StabilityEncoding encode_asynchronous(const StabilityQuery& query);
StabilityEncoding encode(const StabilityQuery& query);  // dispatch on mode

enum class CertifyStatus { Certified, Infeasible, Inconclusive };

const char* to_string(CertifyStatus s);

struct CertifyOutcome {
    CertifyStatus status = CertifyStatus::Inconclusive;
    std::optional<Certificate> certificate;  // engaged iff Certified
    VerificationReport report;               // filled when a candidate existed
    SolveStatus solver_status = SolveStatus::Inaccurate;
    int iterations = 0;
    double ray_error = 0.0;                  // infeasibility-ray defect
    std::string message;
};

/// Encode, solve, extract, and re-verify. A certificate is returned only if
/// independent verification passes. When the plain solve stalls or its
/// iterate fails re-verification, a phase maximizing the smallest Gram margin
/// retries once before the outcome degrades to Inconclusive.
CertifyOutcome certify(const StabilityQuery& query, const SolverOptions& options = {});

/// Re-expands every identity from the certificate's numbers alone:
/// decrease identity and endpoint identity residuals at 1e-6 relative
/// tolerance, Gram eigenvalues at -1e-8. Never throws; failures are
/// pinpointed in the report.
VerificationReport verify_certificate(const Certificate& cert);

struct MaxPeriodResult {
    bool found = false;   // false: no certifiable period at this degree
    double T_star = 0.0;
    std::optional<Certificate> certificate;  // at T_star when found
    int probes = 0;
};

/// Bisect for the largest certifiable sampling period. base supplies system,
/// mode, degree, and margins; its T (synchronous) or T_max (asynchronous,
/// T_min kept) is overwritten per probe. Maintains lo certifiable / hi not;
/// inconclusive probes count as not certifiable. T_lo = 0 means "start with
/// no certified floor"; a positive T_lo must itself certify or the search
/// reports found = false.
MaxPeriodResult max_sampling_period(const StabilityQuery& base, double T_lo, double T_hi,
                                    double resolution, const SolverOptions& options = {});

/// Certificate files: JSON with query parameters, polynomials as graded-lex
/// monomial/coefficient lists, Gram matrices row-major, and the verification
/// report at save time. load re-parses into a Certificate ready for
/// verify_certificate.
std::string certificate_to_json(const Certificate& cert, const VerificationReport& report);
std::pair<Certificate, VerificationReport> certificate_from_json(const std::string& text);
void save_certificate(const Certificate& cert, const VerificationReport& report,
                      const std::string& path);
std::pair<Certificate, VerificationReport> load_certificate(const std::string& path);

/// Variable set (t, x1..xn, z1..zn) plus trailing T in asynchronous mode.
VarSetPtr certificate_varset(int n, Mode mode);

}  // namespace sampcert
