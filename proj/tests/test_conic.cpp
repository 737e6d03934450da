#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sampcert/conic.hpp"

#include <random>

using namespace sampcert;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ConicProblem pin_entry_problem(double rhs_value) {
    ConicProblem p;
    p.blocks = {{BlockKind::Psd, 1}};
    p.A = {{0, 0, 0, 0, 1.0}};
    p.rhs = {rhs_value};
    return p;
}

// Verify a reported ray against the problem data by hand.
double ray_violation(const ConicProblem& p, const std::vector<double>& ray) {
    double tau = 0.0;
    for (std::size_t i = 0; i < p.rhs.size(); ++i) tau += p.rhs[i] * ray[i];
    REQUIRE(tau == doctest::Approx(1.0).epsilon(1e-6));
    double err = 0.0;
    for (std::size_t j = 0; j < p.blocks.size(); ++j) {
        if (p.blocks[j].kind != BlockKind::Psd) continue;
        MatrixXd Z = MatrixXd::Zero(p.blocks[j].size, p.blocks[j].size);
        for (const auto& e : p.A)
            if (e.block == static_cast<int>(j)) {
                Z(e.r, e.c) -= ray[static_cast<std::size_t>(e.row)] * e.value;
                if (e.r != e.c) Z(e.c, e.r) -= ray[static_cast<std::size_t>(e.row)] * e.value;
            }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Z, Eigen::EigenvaluesOnly);
        err = std::max(err, -es.eigenvalues().minCoeff());
    }
    for (std::size_t j = 0; j < p.blocks.size(); ++j) {
        if (p.blocks[j].kind != BlockKind::Free) continue;
        for (int k = 0; k < p.blocks[j].size; ++k) {
            double acc = 0.0;
            for (const auto& e : p.A)
                if (e.block == static_cast<int>(j) && e.r == k)
                    acc += ray[static_cast<std::size_t>(e.row)] * e.value;
            err = std::max(err, std::abs(acc));
        }
    }
    return err;
}

}  // namespace

TEST_CASE("pin a 1x1 PSD entry to 1") {
    auto sol = solve(pin_entry_problem(1.0));
    CHECK(sol.status == SolveStatus::Feasible);
    CHECK(sol.X[0](0, 0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(sol.primal_residual <= 1e-8);
}

TEST_CASE("pin a 1x1 PSD entry to -1: infeasible with a ray") {
    auto sol = solve(pin_entry_problem(-1.0));
    CHECK(sol.status == SolveStatus::Infeasible);
    REQUIRE(sol.ray.size() == 1);
    CHECK(ray_violation(pin_entry_problem(-1.0), sol.ray) <= 1e-6);
}

TEST_CASE("free variable pinned and tied into a PSD block") {
    // [[1, lambda],[lambda, 1]] PSD with lambda = 0.5.
    ConicProblem p;
    p.blocks = {{BlockKind::Psd, 2}, {BlockKind::Free, 1}};
    p.A = {
        {0, 0, 0, 0, 1.0},           // X00 = 1
        {1, 0, 1, 1, 1.0},           // X11 = 1
        {2, 0, 0, 1, 0.5},           // X01 - lambda = 0
        {2, 1, 0, 0, -1.0},
        {3, 1, 0, 0, 1.0},           // lambda = 0.5
    };
    p.rhs = {1.0, 1.0, 0.0, 0.5};
    auto sol = solve(p);
    CHECK(sol.status == SolveStatus::Feasible);
    CHECK(sol.X[1](0, 0) == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(sol.X[0](0, 1) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(check_psd(sol.X[0], 1e-9).first);
}

TEST_CASE("overconstrained PSD entries with no PSD completion") {
    // X00 = X11 = 1 but X01 = 2 cannot be PSD.
    ConicProblem p;
    p.blocks = {{BlockKind::Psd, 2}};
    p.A = {{0, 0, 0, 0, 1.0}, {1, 0, 1, 1, 1.0}, {2, 0, 0, 1, 0.5}};
    p.rhs = {1.0, 1.0, 2.0};
    auto sol = solve(p);
    CHECK(sol.status == SolveStatus::Infeasible);
    REQUIRE(!sol.ray.empty());
    CHECK(ray_violation(p, sol.ray) <= 1e-6);
}

TEST_CASE("contradictory rows on one PSD coordinate") {
    ConicProblem p;
    p.blocks = {{BlockKind::Psd, 1}};
    p.A = {{0, 0, 0, 0, 1.0}, {1, 0, 0, 0, 1.0}};
    p.rhs = {1.0, 2.0};
    auto sol = solve(p);
    CHECK(sol.status == SolveStatus::Infeasible);
    CHECK(ray_violation(p, sol.ray) <= 1e-6);
}

TEST_CASE("contradictory rows on free variables only") {
    ConicProblem p;
    p.blocks = {{BlockKind::Free, 1}};
    p.A = {{0, 0, 0, 0, 1.0}, {1, 0, 0, 0, 1.0}};
    p.rhs = {1.0, 2.0};
    auto sol = solve(p);
    CHECK(sol.status == SolveStatus::Infeasible);
    CHECK(ray_violation(p, sol.ray) <= 1e-6);
}

TEST_CASE("consistent free-only rows mixed with PSD coupling") {
    // Mirrors boundary-identity rows that touch only free coefficients.
    ConicProblem p;
    p.blocks = {{BlockKind::Psd, 2}, {BlockKind::Free, 2}};
    p.A = {
        {0, 0, 0, 0, 1.0},                      // X00 = 1
        {1, 0, 0, 1, 0.5}, {1, 1, 0, 0, -1.0},  // X01 - f0 = 0
        {2, 1, 0, 0, 1.0}, {2, 1, 1, 1, -1.0},  // f0 - f1 = 0 (free-only row)
        {3, 1, 1, 1, 1.0},                      // f1 = 0.3
        {4, 0, 1, 1, 1.0},                      // X11 = 1
    };
    p.rhs = {1.0, 0.0, 0.0, 0.3, 1.0};
    auto sol = solve(p);
    CHECK(sol.status == SolveStatus::Feasible);
    CHECK(sol.X[1](0, 0) == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(sol.X[1](1, 0) == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(sol.X[0](0, 1) == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(sol.primal_residual <= 1e-8);
}

TEST_CASE("small trace objective settles on the minimum-trace completion") {
    ConicProblem p;
    p.blocks = {{BlockKind::Psd, 2}};
    p.A = {{0, 0, 0, 0, 1.0}};
    p.rhs = {1.0};
    p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
    auto sol = solve(p);
    CHECK(sol.status == SolveStatus::Feasible);
    CHECK(sol.X[0](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(sol.X[0](1, 1)) <= 1e-5);
    CHECK(std::abs(sol.X[0](0, 1)) <= 1e-5);
}

TEST_CASE("randomized feasible problems solve to tolerance") {
    std::mt19937 rng(42u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 4 + trial;       // PSD size
        const int nf = 3;              // free vars
        const int m = 2 * n + nf;      // row count
        MatrixXd R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) R(i, j) = gauss(rng);
        MatrixXd X0 = R * R.transpose() + MatrixXd::Identity(n, n);
        VectorXd u0(nf);
        for (int k = 0; k < nf; ++k) u0[k] = gauss(rng);

        ConicProblem p;
        p.blocks = {{BlockKind::Psd, n}, {BlockKind::Free, nf}};
        std::uniform_int_distribution<int> coord(0, n - 1);
        std::uniform_int_distribution<int> fcoord(0, nf - 1);
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int t = 0; t < 4; ++t) {
                int r = coord(rng), c = coord(rng);
                if (r > c) std::swap(r, c);
                double v = gauss(rng);
                p.A.push_back({i, 0, r, c, v});
                acc += r == c ? v * X0(r, c) : 2.0 * v * X0(r, c);
            }
            int k = fcoord(rng);
            double v = gauss(rng);
            p.A.push_back({i, 1, k, k, v});
            acc += v * u0[k];
            p.rhs.push_back(acc);
        }
        auto sol = solve(p);
        REQUIRE(sol.status == SolveStatus::Feasible);
        CHECK(sol.primal_residual <= 1e-8);
        auto [psd_ok, min_eig] = check_psd(sol.X[0], 1e-9);
        CHECK(psd_ok);
    }
}

TEST_CASE("scaling rows by 10 preserves the verdict") {
    auto scale10 = [](ConicProblem p) {
        for (auto& e : p.A) e.value *= 10.0;
        for (auto& v : p.rhs) v *= 10.0;
        return p;
    };
    auto feas = solve(scale10(pin_entry_problem(1.0)));
    CHECK(feas.status == SolveStatus::Feasible);
    CHECK(feas.X[0](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    auto infeas = solve(scale10(pin_entry_problem(-1.0)));
    CHECK(infeas.status == SolveStatus::Infeasible);
}

TEST_CASE("deterministic: repeated solves agree bitwise") {
    ConicProblem p;
    p.blocks = {{BlockKind::Psd, 3}, {BlockKind::Free, 2}};
    p.A = {
        {0, 0, 0, 0, 1.0}, {0, 1, 0, 0, 0.5},
        {1, 0, 1, 1, 2.0}, {1, 1, 1, 1, -1.0},
        {2, 0, 2, 2, 1.0}, {2, 0, 0, 2, 0.25},
        {3, 1, 0, 0, 1.0},
        {4, 0, 0, 1, 1.0}, {4, 1, 1, 1, 1.0},
    };
    p.rhs = {1.0, 2.0, 1.5, 0.7, 0.2};
    auto a = solve(p);
    auto b = solve(p);
    REQUIRE(a.status == b.status);
    CHECK(a.iterations == b.iterations);
    for (std::size_t j = 0; j < a.X.size(); ++j)
        for (int r = 0; r < a.X[j].rows(); ++r)
            for (int c = 0; c < a.X[j].cols(); ++c)
                CHECK(a.X[j](r, c) == b.X[j](r, c));
}

TEST_CASE("vacuous and inconsistent empty rows") {
    ConicProblem p = pin_entry_problem(1.0);
    p.rhs.push_back(0.0);  // empty row, zero rhs: vacuous
    auto sol = solve(p);
    CHECK(sol.status == SolveStatus::Feasible);

    ConicProblem q = pin_entry_problem(1.0);
    q.rhs.push_back(3.0);  // empty row, nonzero rhs: impossible
    auto bad = solve(q);
    CHECK(bad.status == SolveStatus::Infeasible);
    CHECK(ray_violation(q, bad.ray) <= 1e-9);
}

TEST_CASE("unreferenced free variables are pinned to zero") {
    ConicProblem p;
    p.blocks = {{BlockKind::Psd, 1}, {BlockKind::Free, 3}};
    p.A = {{0, 0, 0, 0, 1.0}, {1, 1, 1, 1, 1.0}};  // only f1 appears
    p.rhs = {1.0, 0.25};
    auto sol = solve(p);
    CHECK(sol.status == SolveStatus::Feasible);
    CHECK(sol.X[1](0, 0) == 0.0);
    CHECK(sol.X[1](1, 0) == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(sol.X[1](2, 0) == 0.0);
}

TEST_CASE("check_psd basics") {
    CHECK(check_psd(MatrixXd::Identity(3, 3), 1e-9) == std::pair{true, 1.0});
    MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    auto [ok, eig] = check_psd(bad, 1e-9);
    CHECK(!ok);
    CHECK(eig == doctest::Approx(-1.0).epsilon(1e-12));
    auto [zok, zeig] = check_psd(MatrixXd::Zero(4, 4), 1e-9);
    CHECK(zok);
    CHECK(zeig == doctest::Approx(0.0));
    MatrixXd asym(2, 2);
    asym << 1, 1e-3, 0, 1;
    CHECK_THROWS_AS(check_psd(asym, 1e-9), std::invalid_argument);
}

TEST_CASE("problem validation rejects malformed data") {
    ConicProblem p;
    p.blocks = {{BlockKind::Psd, 2}};
    p.A = {{0, 0, 1, 0, 1.0}};  // lower triangle
    p.rhs = {1.0};
    CHECK_THROWS_AS(solve(p), std::invalid_argument);
    p.A = {{0, 0, 0, 3, 1.0}};  // out of range
    CHECK_THROWS_AS(solve(p), std::invalid_argument);
    p.A = {{2, 0, 0, 0, 1.0}};  // bad row
    CHECK_THROWS_AS(solve(p), std::invalid_argument);
    p.A = {{0, 0, 0, 0, 1.0}};
    CHECK_THROWS_AS(solve(p, SolverOptions{-1.0, 200, false}), std::invalid_argument);
}

TEST_CASE("dump is stable across identical problems") {
    ConicProblem p = pin_entry_problem(1.0);
    p.row_labels = {"pin"};
    ConicProblem q = pin_entry_problem(1.0);
    q.row_labels = {"pin"};
    CHECK(p.dump() == q.dump());
    CHECK(p.dump().find("psd 1") != std::string::npos);
    CHECK(p.dump().find("label 0 pin") != std::string::npos);
}
