#include "sampcert/stability.hpp"

#include "json.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>

namespace sampcert {

namespace {

using nlohmann::json;

json poly_to_json(const Polynomial& p) {
    json monomials = json::array();
    json coefficients = json::array();
    for (const auto& [m, c] : p.terms()) {
        monomials.push_back(m.exponents());
        coefficients.push_back(c);
    }
    return json{{"monomials", std::move(monomials)},
                {"coefficients", std::move(coefficients)},
                {"text", p.to_string()}};
}

Polynomial poly_from_json(const json& j, const VarSetPtr& vars) {
    const auto& monomials = j.at("monomials");
    const auto& coefficients = j.at("coefficients");
    if (!monomials.is_array() || !coefficients.is_array() ||
        monomials.size() != coefficients.size())
        throw std::runtime_error("polynomial monomial/coefficient lists do not match");
    Polynomial out = Polynomial::zero(vars);
    for (std::size_t i = 0; i < monomials.size(); ++i) {
        Monomial m(monomials[i].get<std::vector<int>>());
        out += Polynomial::term(vars, std::move(m), coefficients[i].get<double>());
    }
    return out;
}

json sos_to_json(const SosTerm& s) {
    json basis = json::array();
    for (const auto& m : s.half_basis) basis.push_back(m.exponents());
    json gram = json::array();
    for (Eigen::Index r = 0; r < s.gram.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < s.gram.cols(); ++c) row.push_back(s.gram(r, c));
        gram.push_back(std::move(row));
    }
    return json{{"half_basis", std::move(basis)}, {"gram", std::move(gram)}};
}

SosTerm sos_from_json(const json& j) {
    SosTerm out;
    for (const auto& e : j.at("half_basis"))
        out.half_basis.emplace_back(e.get<std::vector<int>>());
    const auto& gram = j.at("gram");
    const auto n = static_cast<Eigen::Index>(gram.size());
    if (n != static_cast<Eigen::Index>(out.half_basis.size()))
        throw std::runtime_error("Gram size does not match its half-basis");
    out.gram.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = gram[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != n)
            throw std::runtime_error("Gram matrix is not square");
        for (Eigen::Index c = 0; c < n; ++c)
            out.gram(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return out;
}

json query_to_json(const StabilityQuery& q) {
    json dynamics = json::array();
    for (const auto& fi : q.system.f) dynamics.push_back(poly_to_json(fi));
    json system{{"name", q.system.name}, {"n", q.system.n}, {"dynamics", std::move(dynamics)}};
    json out{{"system", std::move(system)},
             {"mode", to_string(q.mode)},
             {"degree", q.degree},
             {"alpha", q.alpha},
             {"mu1", q.mu1},
             {"eps", q.eps}};
    if (q.mode == Mode::Synchronous) {
        out["T"] = q.T;
    } else {
        out["T_min"] = q.T_min;
        out["T_max"] = q.T_max;
    }
    return out;
}

StabilityQuery query_from_json(const json& j) {
    StabilityQuery q;
    const auto& sys = j.at("system");
    q.system.name = sys.at("name").get<std::string>();
    q.system.n = sys.at("n").get<int>();
    if (q.system.n < 1) throw std::runtime_error("system dimension must be at least 1");
    q.system.vars = system_varset(q.system.n);
    for (const auto& e : sys.at("dynamics"))
        q.system.f.push_back(poly_from_json(e, q.system.vars));

    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "synchronous") {
        q.mode = Mode::Synchronous;
        q.T = j.at("T").get<double>();
    } else if (mode == "asynchronous") {
        q.mode = Mode::Asynchronous;
        q.T_min = j.at("T_min").get<double>();
        q.T_max = j.at("T_max").get<double>();
    } else {
        throw std::runtime_error("unknown mode: " + mode);
    }
    q.degree = j.at("degree").get<int>();
    q.alpha = j.at("alpha").get<double>();
    q.mu1 = j.at("mu1").get<double>();
    q.eps = j.at("eps").get<double>();
    return q;
}

json report_to_json(const VerificationReport& r) {
    return json{{"pass", r.pass},
                {"identity_residual", r.identity_residual},
                {"boundary_residual", r.boundary_residual},
                {"lower_residual", r.lower_residual},
                {"min_gram_eigenvalue", r.min_gram_eigenvalue},
                {"failure", r.failure}};
}

VerificationReport report_from_json(const json& j) {
    VerificationReport r;
    r.pass = j.at("pass").get<bool>();
    r.identity_residual = j.at("identity_residual").get<double>();
    r.boundary_residual = j.at("boundary_residual").get<double>();
    r.lower_residual = j.at("lower_residual").get<double>();
    r.min_gram_eigenvalue = j.at("min_gram_eigenvalue").get<double>();
    r.failure = j.at("failure").get<std::string>();
    return r;
}

}  // namespace

std::string certificate_to_json(const Certificate& cert, const VerificationReport& report) {
    json grams{{"lower", sos_to_json(cert.lower)},
               {"s0", sos_to_json(cert.s0)},
               {"s1", sos_to_json(cert.s1)}};
    if (cert.s2) grams["s2"] = sos_to_json(*cert.s2);
    json j{{"query", query_to_json(cert.query)},
           {"variables", cert.vars->names()},
           {"V", poly_to_json(cert.V)},
           {"F", poly_to_json(cert.F)},
           {"grams", std::move(grams)},
           {"verification", report_to_json(report)},
           {"solver",
            json{{"iterations", cert.solver_iterations},
                 {"residual", cert.solver_residual},
                 {"gap", cert.solver_gap}}}};
    return j.dump(2) + "\n";
}

std::pair<Certificate, VerificationReport> certificate_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("certificate is not valid JSON: ") + e.what());
    }
    try {
        Certificate cert;
        cert.query = query_from_json(j.at("query"));
        cert.vars = certificate_varset(cert.query.system.n, cert.query.mode);
        const auto names = j.at("variables").get<std::vector<std::string>>();
        if (names != cert.vars->names())
            throw std::runtime_error("certificate variable list does not match its query");
        cert.V = poly_from_json(j.at("V"), cert.vars);
        cert.F = poly_from_json(j.at("F"), cert.vars);
        const auto& grams = j.at("grams");
        cert.lower = sos_from_json(grams.at("lower"));
        cert.s0 = sos_from_json(grams.at("s0"));
        cert.s1 = sos_from_json(grams.at("s1"));
        if (grams.contains("s2")) cert.s2 = sos_from_json(grams.at("s2"));
        const auto& solver = j.at("solver");
        cert.solver_iterations = solver.at("iterations").get<int>();
        cert.solver_residual = solver.at("residual").get<double>();
        cert.solver_gap = solver.at("gap").get<double>();
        return {std::move(cert), report_from_json(j.at("verification"))};
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed certificate: ") + e.what());
    }
}

void save_certificate(const Certificate& cert, const VerificationReport& report,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open certificate file for writing: " + path);
    out << certificate_to_json(cert, report);
    if (!out) throw std::runtime_error("failed writing certificate file: " + path);
}

std::pair<Certificate, VerificationReport> load_certificate(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open certificate file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return certificate_from_json(text);
}

}  // namespace sampcert
