#!/usr/bin/env python3
"""Independent oracle for frozen test values.

Dependent variables are sympy functions of the independent ones, so total
derivatives are plain sympy.diff calls. Output lines are "name: expression"
in the engine's input syntax and are stored in tests/data/oracle_values.txt.
"""
import itertools
import sys

import sympy as sp


def jet_symbols(fns, xs, order):
    """Map Derivative(u(x..), ...) -> Symbol('u_xt') up to the given order."""
    out = {}
    for f, name in fns:
        for n in range(order, 0, -1):
            for combo in itertools.combinations_with_replacement(range(len(xs)), n):
                d = sp.diff(f, *[xs[i] for i in combo])
                out[d] = sp.Symbol(name + "_" + "".join(str(xs[i]) for i in combo))
        out[f] = sp.Symbol(name)
    return out


def to_text(e, table):
    e = sp.simplify(sp.expand(e).subs(table)) if e != 0 else e
    s = sp.sstr(e)
    return s.replace("**", "^")


def mu_prolong(xs, us, xi, phi, lam, order):
    """Recursive mu-prolongation; lam[i] is a q x q sympy Matrix."""
    p, q = len(xs), len(us)
    psi = {(a, ()): phi[a] for a in range(q)}
    for n in range(1, order + 1):
        for K in itertools.combinations_with_replacement(range(p), n):
            i = K[-1]
            J = K[:-1]
            for a in range(q):
                uJ = lambda b, m: sp.diff(us[b], *[xs[k] for k in J + (m,)])
                val = sp.diff(psi[(a, J)], xs[i])
                val -= sum(uJ(a, m) * sp.diff(xi[m], xs[i]) for m in range(p))
                val += sum(lam[i][a, b] * (psi[(b, J)] - sum(uJ(b, m) * xi[m] for m in range(p))) for b in range(q))
                psi[(a, K)] = sp.expand(val)
    return psi


def apply_field(psi, xs, us, xi, f, order):
    table = jet_symbols([(u, str(u.func)) for u in us], xs, order)
    fs = sp.expand(f).subs(table)
    res = sum(xi[i] * sp.diff(fs, xs[i]) for i in range(len(xs)))
    for (a, J), val in psi.items():
        name = str(us[a].func) + ("_" + "".join(str(xs[k]) for k in J) if J else "")
        res += val * sp.diff(fs, sp.Symbol(name))
    return sp.expand(res)


def emit(name, e, table):
    print(f"{name}: {to_text(e, table)}")


def scalar_ex1():
    x, t, lam = sp.symbols("x t lambda")
    u = sp.Function("u")(x, t)
    xs, us = [x, t], [u]
    table = jet_symbols([(u, "u")], xs, 3)
    L = [sp.Matrix([[lam]]), sp.Matrix([[0]])]
    Z = [sp.Matrix([[0]]), sp.Matrix([[0]])]
    xi, phi = [x, 2 * t], [u]
    psi = mu_prolong(xs, us, xi, phi, L, 2)
    std = mu_prolong(xs, us, xi, phi, Z, 2)
    for K, label in [((0,), "x"), ((1,), "t"), ((0, 0), "xx"), ((0, 1), "xt"), ((1, 1), "tt")]:
        emit(f"ex1.Psi_{label}", psi[(0, K)], table)
    emit("ex1.F_xx", psi[(0, (0, 0))] - std[(0, (0, 0))], table)


def systems_ex2():
    x, y = sp.symbols("x y")
    u, v = sp.Function("u")(x, y), sp.Function("v")(x, y)
    xs = [x, y]
    table = jet_symbols([(u, "u"), (v, "v")], xs, 3)
    Lx = sp.Matrix([[0, -y], [0, 0]])
    Ly = sp.Matrix([[-x / y, x**2 - x], [1 / y**2, x / y]])
    C = sp.diff(Ly, x) - sp.diff(Lx, y) + Lx * Ly - Ly * Lx
    for r in range(2):
        for c in range(2):
            emit(f"sys2.compat_{r + 1}{c + 1}", C[r, c], table)
    psi = mu_prolong(xs, [u, v], [x, 0], [0, 0], [Lx, Ly], 2)
    invs = {
        "zeta4": "v_y - (1/y**2)*(x*u_x - x**2*y*v_x)*log(x)",
        "eta3": "x*(u_xy - x*(2*v_x + x*v_xx + y*v_xy))",
    }
    for name, text in invs.items():
        f = sp.sympify(text, locals={**{str(s): s for s in table.values()}, "x": x, "y": y})
        back = {s: d for d, s in table.items()}
        emit(f"sys2.residual_{name}", apply_field(psi, xs, [u, v], [x, 0], f.subs(back), 2), table)


def systems_ex1():
    x, y, lam = sp.symbols("x y lambda")
    u, v = sp.Function("u")(x, y), sp.Function("v")(x, y)
    xs = [x, y]
    table = jet_symbols([(u, "u"), (v, "v")], xs, 3)
    back = {s: d for d, s in table.items()}
    L = [lam * sp.eye(2), sp.zeros(2)]
    xi = [x, 2 * y]
    psi = mu_prolong(xs, [u, v], xi, [u, 2 * v], L, 2)
    names = {str(s): s for s in table.values()}
    names.update({"x": x, "y": y, "lam": lam})
    eta5 = sp.sympify(
        "(v_xx + 4*v/x**2 - 3*v_x/y + 4*y*u_xy - 4*y*v_y/x**2 + 4*y*u_y/x - 4*y**2*v_yy/x**2"
        " + 8*y**2*u_yy/x + lam*(v_x - 2*v/x + 2*y*v_y/x))*exp(2*lam*x)",
        locals=names,
    )
    emit("sys1.residual_eta5", apply_field(psi, xs, [u, v], xi, eta5.subs(back), 2), table)
    # restriction to Q = D_x Q = D_y Q = 0, solved for the y-derivatives
    S = names
    uy = (S["u"] - x * S["u_x"]) / (2 * y)
    uxy = -x * S["u_xx"] / (2 * y)
    uyy = -(uy + x * uxy) / (2 * y)
    vy = (2 * S["v"] - x * S["v_x"]) / (2 * y)
    vxy = (S["v_x"] - x * S["v_xx"]) / (2 * y)
    vyy = -(x * vxy) / (2 * y)
    rules = {S["u_y"]: uy, S["u_xy"]: uxy, S["u_yy"]: uyy, S["v_y"]: vy, S["v_xy"]: vxy, S["v_yy"]: vyy}
    emit("sys1.restricted_eta5", eta5.subs(rules), table)


def euler_heat_rule():
    x, t = sp.symbols("x t")
    u = sp.Function("u")(x, t)
    table = jet_symbols([(u, "u")], [x, t], 3)
    alpha, beta = u, -u**2 / 2
    r = sp.diff(beta, x) - sp.diff(alpha, t)
    r = r.subs(sp.diff(u, t), sp.diff(u, x, 2))
    emit("euler.compat_heat_rule", r, table)


def heat_family():
    x, t = sp.symbols("x t")
    c = sp.symbols("c1:7")
    u = sp.Function("u")(x, t)
    P = sp.Function("P")(x, t, u)
    zeta = sp.Function("zeta")(x, t)
    table = jet_symbols([(u, "u")], [x, t], 4)
    for label, quad in [("literal", x**2 - 2 * x * t), ("corrected", x**2 + 2 * t)]:
        xi = sp.exp(-P) * (c[0] + c[1] * t + c[2] / 2 * x + c[3] / 2 * x * t)
        tau = sp.exp(-P) * (c[4] + c[2] * t + c[3] / 2 * t**2)
        phi = sp.exp(-P) * (zeta + (-(c[1] / 2) * x - c[3] / 8 * quad + c[5]) * u)
        lam = [sp.Matrix([[sp.diff(P, x)]]), sp.Matrix([[sp.diff(P, t)]])]
        psi = mu_prolong([x, t], [u], [xi, tau], [phi], lam, 2)
        r = psi[(0, (1,))] - psi[(0, (0, 0))]
        # restrict: u_t -> u_xx and its differential consequences, zeta_t -> zeta_xx
        r = r.subs(sp.diff(u, t, 2), sp.diff(u, x, 4)).subs(sp.diff(u, x, t), sp.diff(u, x, 3))
        r = r.subs(sp.diff(u, t), sp.diff(u, x, 2))
        r = r.subs(sp.Derivative(zeta, t), sp.diff(zeta, x, 2)).doit()
        r = sp.simplify(sp.expand(r) * sp.exp(P))
        emit(f"heat.{label}_restricted_times_expP", r.subs(P, sp.Symbol("P")), table)


if __name__ == "__main__":
    scalar_ex1()
    systems_ex2()
    systems_ex1()
    euler_heat_rule()
    heat_family()
    sys.stdout.flush()
