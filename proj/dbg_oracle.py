"""Independent feasibility oracle for the jet-engine SOS programs.

Rebuilds the coefficient-matching SDPs from scratch (sympy expansion,
cvxpy solve) to cross-check the C++ pipeline's infeasibility verdicts.
"""
import itertools
import sys

import cvxpy as cp
import numpy as np
import sympy as sp


def monos(gens, lo, hi):
    out = []
    for d in range(lo, hi + 1):
        for combo in itertools.combinations_with_replacement(range(len(gens)), d):
            e = [0] * len(gens)
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def mono_expr(gens, e):
    m = sp.Integer(1)
    for g, k in zip(gens, e):
        m *= g**k
    return m


class LinDict:
    """exponent tuple -> cvxpy affine scalar"""

    def __init__(self):
        self.d = {}

    def add_poly_times(self, gens, poly, coeff):
        p = sp.Poly(sp.expand(poly), *gens)
        for exps, c in p.terms():
            cur = self.d.get(exps, 0)
            self.d[exps] = cur + float(c) * coeff

    def add(self, other):
        for k, v in other.d.items():
            self.d[k] = self.d.get(k, 0) + v


def gram_expand(gens, half, G):
    out = LinDict()
    n = len(half)
    me = [mono_expr(gens, e) for e in half]
    for i in range(n):
        for j in range(i, n):
            p = sp.Poly(sp.expand(me[i] * me[j]), *gens)
            ((exps, c),) = p.terms()
            w = float(c) * (1.0 if i == j else 2.0)
            out.d[exps] = out.d.get(exps, 0) + w * G[i, j]
    return out


def equate(lhs, rhs):
    cons = []
    for k in set(lhs.d) | set(rhs.d):
        l = lhs.d.get(k, 0)
        r = rhs.d.get(k, 0)
        cons.append(l == r)
    return cons


def solve_and_report(tag, constraints, grams, lower_gram):
    lam = cp.Variable()
    cons = list(constraints)
    for G in grams:
        n = G.shape[0]
        cons.append(G - lam * np.eye(n) >> 0)
    cons.append(cp.trace(lower_gram) <= 1e3)
    prob = cp.Problem(cp.Maximize(lam), cons)
    solver = "CLARABEL" if "CLARABEL" in cp.installed_solvers() else "SCS"
    try:
        prob.solve(solver=solver)
    except cp.SolverError as e:
        print(f"{tag}: solver error {e}")
        return
    print(f"{tag}: status={prob.status} margin={prob.value if prob.value is not None else float('nan'):.6e} [{solver}]")


def continuous(N, mu1, eps, tag):
    z1, z2 = sp.symbols("z1 z2")
    gens = (z1, z2)
    f = [-z2 - sp.Rational(3, 2) * z1**2 - sp.Rational(1, 2) * z1**3, -z2 + z1]

    vbasis = [mono_expr(gens, e) for e in monos(gens, 2, N)]
    cV = cp.Variable(len(vbasis))

    lower_half = monos(gens, 1, N // 2)
    GL = cp.Variable((len(lower_half),) * 2, symmetric=True)
    half_id = (N + 2) // 2  # identity degree N+2, half basis up to that
    s0_half = monos(gens, 1, half_id)
    G0 = cp.Variable((len(s0_half),) * 2, symmetric=True)

    z2norm = z1**2 + z2**2

    # V - mu1*||z||^2 == lower
    L = LinDict()
    for k, m in enumerate(vbasis):
        L.add_poly_times(gens, m, cV[k])
    L.add_poly_times(gens, -mu1 * z2norm, 1.0)
    cons = equate(L, gram_expand(gens, lower_half, GL))

    # -(dV.f + eps*||z||^2) == s0
    L = LinDict()
    for k, m in enumerate(vbasis):
        dm = sum(sp.diff(m, g) * fi for g, fi in zip(gens, f))
        L.add_poly_times(gens, -dm, cV[k])
    L.add_poly_times(gens, -eps * z2norm, 1.0)
    cons += equate(L, gram_expand(gens, s0_half, G0))

    solve_and_report(tag, cons, [GL, G0], GL)


def sampled(T, N, mu1, eps, tag, fexprs=None):
    t, x1, x2, z1, z2 = sp.symbols("t x1 x2 z1 z2")
    gens = (t, x1, x2, z1, z2)
    zs = (z1, z2)
    if fexprs is None:
        f = [-x2 - sp.Rational(3, 2) * z1**2 - sp.Rational(1, 2) * z1**3, -z2 + z1]
    else:
        f = fexprs(t, x1, x2, z1, z2)

    vbasis = [mono_expr((z1, z2), e) for e in monos(zs, 2, N)]
    cV = cp.Variable(len(vbasis))
    fbasis = [mono_expr(gens, e) for e in monos(gens, 0, N)]
    cF = cp.Variable(len(fbasis))

    lower_half = [(0, 0) + e for e in monos(zs, 1, N // 2)]
    GL = cp.Variable((len(lower_half),) * 2, symmetric=True)

    ident_deg = N + 2  # grad(F) deg N-1 times f deg 3
    s0_half = monos(gens, 0, ident_deg // 2)
    G0 = cp.Variable((len(s0_half),) * 2, symmetric=True)
    s1_half = monos(gens, 0, (ident_deg - 2) // 2)
    G1 = cp.Variable((len(s1_half),) * 2, symmetric=True)

    z2norm = z1**2 + z2**2

    # V - mu1*||z||^2 == lower
    L = LinDict()
    for k, m in enumerate(vbasis):
        L.add_poly_times(gens, m, cV[k])
    L.add_poly_times(gens, -mu1 * z2norm, 1.0)
    cons = equate(L, gram_expand(gens, lower_half, GL))

    # -(sum_i (dV/dzi + dF/dzi) f_i + dF/dt + eps||z||^2) == s0 + s1*t*(T-t)
    L = LinDict()
    for k, m in enumerate(vbasis):
        dm = sum(sp.diff(m, zi) * fi for zi, fi in zip(zs, f))
        L.add_poly_times(gens, -dm, cV[k])
    for k, m in enumerate(fbasis):
        dm = sum(sp.diff(m, zi) * fi for zi, fi in zip(zs, f)) + sp.diff(m, t)
        L.add_poly_times(gens, -dm, cF[k])
    L.add_poly_times(gens, -eps * z2norm, 1.0)
    R = gram_expand(gens, s0_half, G0)
    g = t * (T - t)
    Rg = LinDict()
    me = [mono_expr(gens, e) for e in s1_half]
    n1 = len(s1_half)
    for i in range(n1):
        for j in range(i, n1):
            w = 1.0 if i == j else 2.0
            Rg.add_poly_times(gens, sp.expand(me[i] * me[j] * g), w * G1[i, j])
    R.add(Rg)
    cons += equate(L, R)

    # F(T,x,z) == F(0,x,x)
    L = LinDict()
    R = LinDict()
    for k, m in enumerate(fbasis):
        L.add_poly_times(gens, m.subs(t, T), cF[k])
        R.add_poly_times(gens, m.subs([(t, 0), (z1, x1), (z2, x2)]), cF[k])
    cons += equate(L, R)

    solve_and_report(tag, cons, [GL, G0, G1], GL)


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "cont"
    if which == "cont":
        continuous(4, 1e-2, 1e-6, "jet continuous N=4")
        continuous(6, 1e-2, 1e-6, "jet continuous N=6")
        continuous(6, 1e-4, 0.0, "jet continuous N=6 mu1=1e-4 eps=0")
    elif which == "samp":
        sampled(0.05, 4, 1e-2, 1e-6, "jet sampled T=0.05 N=4")
        sampled(0.16, 4, 1e-2, 1e-6, "jet sampled T=0.16 N=4")
    elif which == "sanity":
        def lin(t, x1, x2, z1, z2):
            return [-x2, -z2 + z1]
        sampled(0.16, 4, 1e-2, 1e-6, "jet-lin sampled T=0.16 N=4", fexprs=lin)

def samp6():
    sampled(0.45, 6, 1e-2, 1e-6, "jet sampled T=0.45 N=6")
    sampled(0.48, 6, 1e-2, 1e-6, "jet sampled T=0.48 N=6")
