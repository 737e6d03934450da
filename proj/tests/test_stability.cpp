#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sampcert/stability.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace sampcert;

namespace {

StabilityQuery linear_query(double T, int degree) {
    StabilityQuery q;
    q.system = make_system("lin", 1, {"-xk1"});
    q.mode = Mode::Synchronous;
    q.T = T;
    q.degree = degree;
    return q;
}

StabilityQuery cubic_query(double T, int degree) {
    StabilityQuery q;
    q.system = make_system("cubic", 1, {"-z1^3 + 2*z1^2 - 1.1*xk1"});
    q.mode = Mode::Synchronous;
    q.T = T;
    q.degree = degree;
    return q;
}

/// Shared across test cases so the solver runs once for this instance.
const CertifyOutcome& cubic_certified() {
    static CertifyOutcome outcome = certify(cubic_query(0.5, 4));
    return outcome;
}

double eval1(const Polynomial& p, double t, double x, double z) {
    return p.eval(std::map<std::string, double>{{"t", t}, {"x1", x}, {"z1", z}});
}

}  // namespace

TEST_CASE("query validation names the offending field") {
    StabilityQuery q = linear_query(1.0, 4);
    CHECK_NOTHROW(q.validate());

    q.degree = 3;
    CHECK_THROWS_WITH_AS(q.validate(), doctest::Contains("even integer"),
                         std::invalid_argument);
    q.degree = 4;
    q.T = 0.0;
    CHECK_THROWS_WITH_AS(q.validate(), doctest::Contains("period T"),
                         std::invalid_argument);
    q.T = 1.0;
    q.mu1 = 0.0;
    CHECK_THROWS_WITH_AS(q.validate(), doctest::Contains("mu1"), std::invalid_argument);
    q.mu1 = 1e-2;
    q.alpha = -0.1;
    CHECK_THROWS_WITH_AS(q.validate(), doctest::Contains("alpha"), std::invalid_argument);
    q.alpha = 0.0;

    q.mode = Mode::Asynchronous;
    q.T_min = 0.5;
    q.T_max = 0.5;
    CHECK_THROWS_WITH_AS(q.validate(), doctest::Contains("T_min < T_max"),
                         std::invalid_argument);
    q.T_min = -0.1;
    q.T_max = 0.5;
    CHECK_THROWS_WITH_AS(q.validate(), doctest::Contains("T_min"), std::invalid_argument);

    StabilityQuery empty;
    CHECK_THROWS_WITH_AS(empty.validate(), doctest::Contains("dimension"),
                         std::invalid_argument);

    CHECK_THROWS_AS(certify(empty), std::invalid_argument);
    CHECK_THROWS_AS(encode_synchronous(StabilityQuery{make_system("lin", 1, {"-xk1"}),
                                                      Mode::Asynchronous}),
                    std::invalid_argument);
}

TEST_CASE("certificate variable ordering") {
    auto sync = certificate_varset(2, Mode::Synchronous);
    REQUIRE(sync->size() == 5);
    CHECK(sync->name(0) == "t");
    CHECK(sync->name(1) == "x1");
    CHECK(sync->name(2) == "x2");
    CHECK(sync->name(3) == "z1");
    CHECK(sync->name(4) == "z2");

    auto async = certificate_varset(1, Mode::Asynchronous);
    REQUIRE(async->size() == 4);
    CHECK(async->name(3) == "T");

    CHECK(std::string(to_string(Mode::Synchronous)) == "synchronous");
    CHECK(std::string(to_string(Mode::Asynchronous)) == "asynchronous");
    CHECK(std::string(to_string(CertifyStatus::Certified)) == "certified");
    CHECK(std::string(to_string(CertifyStatus::Infeasible)) == "infeasible");
    CHECK(std::string(to_string(CertifyStatus::Inconclusive)) == "inconclusive");
}

TEST_CASE("encoding is deterministic") {
    auto dump_once = [] {
        StabilityEncoding enc = encode(cubic_query(0.5, 4));
        return enc.program.compile().problem.dump();
    };
    const std::string a = dump_once();
    const std::string b = dump_once();
    CHECK(a == b);
    CHECK(!a.empty());
}

TEST_CASE("held-feedback integrator certifies inside its stable range") {
    // dx/dt = -x(t_k): exact interval map is 1 - T, stable iff T < 2. The
    // quartic ansatz is the smallest that works: the endpoint identity forces
    // the t-independent mixed terms of any quadratic interval witness to
    // vanish, which leaves nothing to cancel the decrease cross terms.
    CertifyOutcome out = certify(linear_query(1.0, 4));
    REQUIRE(out.status == CertifyStatus::Certified);
    REQUIRE(out.certificate.has_value());
    CHECK(out.report.pass);
    CHECK(out.report.identity_residual <= 1e-6);
    CHECK(out.report.boundary_residual <= 1e-6);
    CHECK(out.report.min_gram_eigenvalue >= -1e-8);
    CHECK(out.message == "certificate verified");

    const Certificate& cert = *out.certificate;
    // V depends on z alone, vanishes at the origin, dominates mu1*z^2
    CHECK(eval1(cert.V.derivative("t"), 0.3, 0.7, 0.9) == 0.0);
    CHECK(eval1(cert.V.derivative("x1"), 0.3, 0.7, 0.9) == 0.0);
    CHECK(eval1(cert.V, 0.0, 0.0, 0.0) == 0.0);
    CHECK(eval1(cert.V, 0.0, 0.0, 1.0) >= cert.query.mu1 - 1e-7);
}

TEST_CASE("held-feedback integrator is refused beyond its stable range") {
    CertifyOutcome out = certify(linear_query(2.5, 4));
    CHECK(out.status == CertifyStatus::Infeasible);
    CHECK(!out.certificate.has_value());
    CHECK(out.ray_error <= 1e-6);
    CHECK(out.message.find("no certificate") != std::string::npos);
}

TEST_CASE("bisection brackets the linear stability boundary") {
    MaxPeriodResult res = max_sampling_period(linear_query(1.0, 4), 0.0, 3.0, 0.05);
    REQUIRE(res.found);
    CHECK(res.T_star <= 2.0 + 0.05);  // sound: never beyond the true boundary
    CHECK(res.T_star >= 1.5);
    CHECK(res.probes > 3);
    REQUIRE(res.certificate.has_value());
    CHECK(verify_certificate(*res.certificate).pass);
    CHECK(res.certificate->query.T == res.T_star);
}

TEST_CASE("cubic system certifies at quartic degree") {
    const CertifyOutcome& out = cubic_certified();
    REQUIRE(out.status == CertifyStatus::Certified);
    REQUIRE(out.certificate.has_value());
    CHECK(out.report.pass);
    CHECK(out.iterations > 0);

    const Certificate& cert = *out.certificate;
    CHECK(cert.lower.gram.rows() == cert.lower.half_basis.size());
    CHECK(cert.s0.gram.rows() == cert.s0.half_basis.size());
    CHECK(!cert.s2.has_value());  // synchronous: no period-interval multiplier
    CHECK(eval1(cert.V, 0.0, 0.0, 1.0) > 0.0);
    CHECK(eval1(cert.V, 0.0, 0.0, -2.0) > 0.0);
}

TEST_CASE("quadratic storage cannot certify the cubic system") {
    for (double T : {0.1, 0.5}) {
        CertifyOutcome out = certify(cubic_query(T, 2));
        CHECK(out.status != CertifyStatus::Certified);
        CHECK(!out.certificate.has_value());
    }
}

TEST_CASE("long periods are refused for the cubic system") {
    CertifyOutcome out = certify(cubic_query(2.5, 4));
    CHECK(out.status == CertifyStatus::Infeasible);
    CHECK(out.ray_error <= 1e-6);
}

TEST_CASE("verification independently re-checks the numbers") {
    REQUIRE(cubic_certified().certificate.has_value());
    const Certificate& cert = *cubic_certified().certificate;

    // untouched certificate passes
    VerificationReport ok = verify_certificate(cert);
    CHECK(ok.pass);

    // tampering with V breaks the storage lower bound re-expansion
    Certificate bad_v = cert;
    bad_v.V = cert.V + 0.1 * Polynomial::variable(cert.vars, "z1").pow(3);
    VerificationReport rv = verify_certificate(bad_v);
    CHECK(!rv.pass);
    CHECK(rv.failure.find("storage lower-bound identity") != std::string::npos);

    // tampering with F breaks the decrease identity
    Certificate bad_f = cert;
    bad_f.F = cert.F + 0.1 * Polynomial::variable(cert.vars, "t") *
                           Polynomial::variable(cert.vars, "x1");
    VerificationReport rf = verify_certificate(bad_f);
    CHECK(!rf.pass);
    CHECK(rf.failure.find("decrease identity") != std::string::npos);

    // an indefinite Gram is named
    Certificate bad_g = cert;
    bad_g.s0.gram = -Eigen::MatrixXd::Identity(cert.s0.gram.rows(), cert.s0.gram.cols());
    VerificationReport rg = verify_certificate(bad_g);
    CHECK(!rg.pass);
    CHECK(rg.failure.find("not positive semidefinite") != std::string::npos);

    // a certificate claiming the wrong variable count is rejected up front
    Certificate bad_vars = cert;
    bad_vars.vars = certificate_varset(2, Mode::Synchronous);
    CHECK(!verify_certificate(bad_vars).pass);
}

TEST_CASE("asynchronous intervals certify and carry the extra multiplier") {
    StabilityQuery q;
    q.system = make_system("cubic", 1, {"-z1^3 + 2*z1^2 - 1.1*xk1"});
    q.mode = Mode::Asynchronous;
    q.T_min = 0.0;
    q.T_max = 0.5;
    q.degree = 4;
    CertifyOutcome out = certify(q);
    REQUIRE(out.status == CertifyStatus::Certified);
    REQUIRE(out.certificate.has_value());
    CHECK(out.report.pass);
    REQUIRE(out.certificate->s2.has_value());
    CHECK(out.certificate->vars->size() == 4);  // (t, x1, z1, T)
}

TEST_CASE("certificate files round-trip exactly") {
    const CertifyOutcome& out = cubic_certified();
    REQUIRE(out.certificate.has_value());
    const std::string path = "tmp_cert_roundtrip.json";

    save_certificate(*out.certificate, out.report, path);
    auto [loaded, loaded_report] = load_certificate(path);
    CHECK(loaded_report.pass == out.report.pass);
    CHECK(loaded.vars->size() == out.certificate->vars->size());
    CHECK(loaded.query.T == out.certificate->query.T);
    CHECK(loaded.query.degree == out.certificate->query.degree);

    // the loaded numbers stand on their own
    VerificationReport re = verify_certificate(loaded);
    CHECK(re.pass);

    // serialization is exact: dump(load(dump end)) is byte-identical
    const std::string text = certificate_to_json(*out.certificate, out.report);
    CHECK(certificate_to_json(loaded, loaded_report) == text);

    std::remove(path.c_str());

    CHECK_THROWS_WITH_AS(load_certificate("no_such_certificate_file.json"),
                         doctest::Contains("cannot open"), std::runtime_error);
    CHECK_THROWS_WITH_AS(certificate_from_json("{ not json"),
                         doctest::Contains("not valid JSON"), std::runtime_error);
    CHECK_THROWS_WITH_AS(certificate_from_json("{\"query\": {}}"),
                         doctest::Contains("malformed certificate"), std::runtime_error);
}
