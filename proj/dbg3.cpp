#include "sampcert/stability.hpp"
#include <cmath>
#include <cstdio>
using namespace sampcert;

static int find_basis(const std::vector<Monomial>& basis, const std::vector<int>& exps) {
    for (std::size_t k = 0; k < basis.size(); ++k)
        if (basis[k].exponents() == exps) return static_cast<int>(k);
    std::printf("basis monomial not found!\n");
    return -1;
}

int main() {
    const double eps = 1e-6, mu1 = 1e-2, T = 1.0;
    auto vars = certificate_varset(1, Mode::Synchronous);  // (t, x1, z1)
    SystemDef sys = make_system("lin", 1, {"-xk1"});
    Polynomial f = sys.f[0].embedded(vars);
    std::vector<bool> zmask(vars->size(), false);
    zmask[2] = true;
    Polynomial z2 = Polynomial::variable(vars, "z1").pow(2);

    SosProgram prog;
    DecisionPoly V = prog.new_decision_poly(vars, monomials_in_degrees(*vars, 2, 4, &zmask));
    DecisionPoly F = prog.new_decision_poly(vars, 4);
    SosPoly lower = prog.new_sos_poly(vars, monomials_in_degrees(*vars, 1, 2, &zmask));
    prog.assert_poly_eq(V.expr() - LinearPoly::from_poly(z2 * mu1), lower.expr());

    LinearPoly lhs(vars);
    lhs += V.expr().derivative("z1").times(f);
    lhs += F.expr().derivative("z1").times(f);
    lhs += F.expr().derivative("t");
    lhs += LinearPoly::from_poly(z2 * eps);
    Polynomial t = Polynomial::variable(vars, "t");
    Polynomial g1 = t * (Polynomial::constant(vars, T) - t);
    auto mult = prog.psatz_combine(-lhs, {g1});
    prog.assert_poly_eq(lower.trace(),
                        LinearPoly::from_poly(Polynomial::constant(vars, 1.0)));

    // ---- hand-constructed candidate ----
    int max_id = 0;
    auto bump = [&](const std::vector<int>& ids) {
        for (int id : ids) max_id = std::max(max_id, id);
    };
    bump(V.ids);
    bump(F.ids);
    bump(lower.gram_ids);
    bump(mult.s0.gram_ids);
    bump(mult.s[0].gram_ids);
    std::vector<double> vals(static_cast<std::size_t>(max_id) + 1, 0.0);

    // V = 1.01 z^2
    vals[(std::size_t)V.ids[(std::size_t)find_basis(V.basis, {0, 0, 2})]] = 1.01;
    // F = -1.01 t z^2 - 1.05 t x^2
    vals[(std::size_t)F.ids[(std::size_t)find_basis(F.basis, {1, 0, 2})]] = -1.01;
    vals[(std::size_t)F.ids[(std::size_t)find_basis(F.basis, {1, 2, 0})]] = -1.05;
    // lower: G(z,z) = 1 on half basis {z, z^2}
    {
        int iz = find_basis(lower.half_basis, {0, 0, 1});
        vals[(std::size_t)lower.id_at(iz, iz)] = 1.0;
    }
    // s1 = 2 x^2 on half basis {1, t, x, z}
    {
        int ix = find_basis(mult.s[0].half_basis, {0, 1, 0});
        vals[(std::size_t)mult.s[0].id_at(ix, ix)] = 2.0;
    }
    // s0 Gram on (z, x, tx): [[1.01-eps, 1.01, -1.01], [1.01, 1.05, -1], [-1.01, -1, 2]]
    {
        const auto& hb = mult.s0.half_basis;
        int iz = find_basis(hb, {0, 0, 1});
        int ix = find_basis(hb, {0, 1, 0});
        int itx = find_basis(hb, {1, 1, 0});
        auto set = [&](int i, int j, double v) {
            vals[(std::size_t)mult.s0.id_at(std::min(i, j), std::max(i, j))] = v;
        };
        set(iz, iz, 1.01 - eps);
        set(iz, ix, 1.01);
        set(iz, itx, -1.01);
        set(ix, ix, 1.05);
        set(ix, itx, -1.0);
        set(itx, itx, 2.0);
    }

    // ---- identity checks straight from the expressions ----
    {
        LinearPoly diff = V.expr() - LinearPoly::from_poly(z2 * mu1) - lower.expr();
        std::printf("lower identity max|coeff| = %.3e\n",
                    diff.instantiate(vals).max_abs_coefficient());
        LinearPoly combo = mult.s0.expr() + mult.s[0].expr().times(g1);
        LinearPoly diff2 = (-lhs) - combo;
        std::printf("decrease identity max|coeff| = %.3e\n",
                    diff2.instantiate(vals).max_abs_coefficient());
        Eigen::MatrixXd G0 = mult.s0.gram(vals);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G0);
        std::printf("s0 gram min eig = %.3e, trace(lower)=%.3f\n",
                    es.eigenvalues().minCoeff(), lower.gram(vals).trace());
    }

    // ---- compiled row check ----
    auto compiled = prog.compile();
    const auto& P = compiled.problem;
    std::vector<Eigen::MatrixXd> X;
    for (const auto& b : P.blocks)
        X.push_back(b.kind == BlockKind::Free ? Eigen::MatrixXd::Zero(b.size, 1)
                                              : Eigen::MatrixXd::Zero(b.size, b.size));
    for (std::size_t id = 0; id < vals.size(); ++id) {
        const auto& L = compiled.locs[id];
        if (L.kind == 0) {
            X[(std::size_t)L.block](L.r, 0) = vals[id];
        } else {
            X[(std::size_t)L.block](L.r, L.c) = vals[id];
            X[(std::size_t)L.block](L.c, L.r) = vals[id];
        }
    }
    std::vector<double> resid(P.rhs.size());
    for (std::size_t r = 0; r < P.rhs.size(); ++r) resid[r] = -P.rhs[r];
    for (const auto& e : P.A) {
        const auto& B = P.blocks[(std::size_t)e.block];
        double contrib;
        if (B.kind == BlockKind::Free)
            contrib = e.value * X[(std::size_t)e.block](e.r, 0);
        else if (e.r == e.c)
            contrib = e.value * X[(std::size_t)e.block](e.r, e.r);
        else
            contrib = 2.0 * e.value * X[(std::size_t)e.block](e.r, e.c);
        resid[(std::size_t)e.row] += contrib;
    }
    int bad = 0;
    for (std::size_t r = 0; r < resid.size(); ++r)
        if (std::abs(resid[r]) > 1e-9) {
            std::printf("ROW %3zu residual %+.6e  label=%s\n", r, resid[r],
                        P.row_labels.empty() ? "?" : P.row_labels[r].c_str());
            ++bad;
        }
    std::printf("compiled rows: %d, violated by candidate: %d\n", P.num_rows(), bad);
    return 0;
}
