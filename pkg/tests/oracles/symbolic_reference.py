"""Symbolic reference values backing the frozen constants in the tests.

Everything here is derived independently of the package code: cell
averages come from explicit segment-by-segment symbolic integration of
the saw-tooth profiles, the scalar reduction is performed by sympy's
solver on the descriptor system, and the integration-constant audit is
evaluated with 50-digit arithmetic.  Run

    python3 tests/oracles/symbolic_reference.py

to regenerate the table; the tests cite the printed float64 values.
"""

from __future__ import annotations

import mpmath
import sympy as sp

# Base parameter set used throughout the suite.
G = sp.Rational(1, 2)          # normalised split g
H = sp.Rational(1, 4)          # normalised amplitude h
L0 = sp.Integer(1)             # cell edge
RHO_S, RHO_F = sp.Integer(2000), sp.Integer(1000)
LAM, MU = sp.Integer(10) ** 7, sp.Integer(10) ** 7
VS, VF = sp.Integer(10) ** 5, sp.Integer(10) ** 3
ETA = sp.Rational(1, 100)
T0 = sp.Integer(10)


def segment_integrals(l0, g, h):
    """1-D integrals of the saw-tooth, its square and its gradient.

    Returns a dict of (expression, region) -> integral over that x-range,
    where region is "solid" ([0, g l0]) or "fluid" ([g l0, l0]).
    """
    x = sp.symbols("x", positive=True)
    gl = g * l0
    a = h * l0
    down = a - 2 * a / gl * x                      # value on [0, g l0]
    up = -a + 2 * a / (l0 - gl) * (x - gl)         # value on [g l0, l0]
    d_down = sp.diff(down, x)
    d_up = sp.diff(up, x)
    out = {}
    for name, solid_expr, fluid_expr in (
        ("value", down, up),
        ("square", down ** 2, up ** 2),
        ("grad", d_down, d_up),
        ("grad_square", d_down ** 2, d_up ** 2),
    ):
        out[name, "solid"] = sp.integrate(solid_expr, (x, 0, gl))
        out[name, "fluid"] = sp.integrate(fluid_expr, (x, gl, l0))
    return out


def cell_averages(l0, g, h):
    """Phase-restricted cell averages for the cubic cell.

    The fluid region is the box (g l0, l0)^3, every average is normalised
    by the full cell volume l0^3, and the solid value is full minus fluid.
    """
    seg = segment_integrals(l0, g, h)
    vol = l0 ** 3
    side = l0 - g * l0

    def one_axis(name):
        fluid = seg[name, "fluid"] * side ** 2 / vol
        full = (seg[name, "solid"] + seg[name, "fluid"]) / l0
        return sp.simplify(full - fluid), sp.simplify(fluid)

    def two_axis(name):
        # product of gradients along two distinct axes
        fluid = seg[name, "fluid"] ** 2 * side / vol
        full = ((seg[name, "solid"] + seg[name, "fluid"]) / l0) ** 2
        return sp.simplify(full - fluid), sp.simplify(fluid)

    grad_s, grad_f = one_axis("grad")
    gsq_s, gsq_f = one_axis("grad_square")
    sq_s, sq_f = one_axis("square")
    gprod_s, gprod_f = two_axis("grad")
    phi_f = side ** 3 / vol
    return {
        "grad": (grad_s, grad_f),
        "grad_square": (gsq_s, gsq_f),
        "square": (sq_s, sq_f),
        "grad_product": (gprod_s, gprod_f),
        "phi_f": sp.simplify(phi_f),
    }


def macro(l0, g, h, rho_s, rho_f, lam, mu, vs, vf, inertia="average"):
    """Macro coefficient set; inertia either the cell average or the
    published g^3-weighted variant."""
    av = cell_averages(l0, g, h)
    grad_s, grad_f = av["grad"]
    gsq_s, gsq_f = av["grad_square"]
    sq_s, sq_f = av["square"]
    gprod_s, gprod_f = av["grad_product"]
    e = grad_f
    f1 = (lam + 2 * mu) * grad_s
    f2 = lam * grad_s
    w1 = sp.Rational(4, 3) * (vs * grad_s + vf * grad_f)
    w2 = -sp.Rational(2, 3) * (vs * grad_s + vf * grad_f)
    c_diag = (lam + 2 * mu) * gsq_s
    c_off = lam * gprod_s
    d_diag = sp.Rational(4, 3) * (vs * gsq_s + vf * gsq_f)
    d_off = -sp.Rational(2, 3) * (vs * gprod_s + vf * gprod_f)
    if inertia == "average":
        m = rho_s * sq_s + rho_f * sq_f
    else:
        m = (h * l0) ** 2 * (3 * l0 ** 2) * (g ** 3 * rho_s + (1 - g) ** 3 * rho_f) / 3
    return {
        "e": e, "f1": f1, "f2": f2, "w1": w1, "w2": w2,
        "C_diag": c_diag, "C_off": c_off, "D_diag": d_diag, "D_off": d_off,
        "m": m, "phi_f": av["phi_f"],
    }


def reduce_descriptors(mc):
    """Eliminate Q1 and P from the symmetric descriptor system.

    System, with u the axial macro strain and s = e2 + e3 = 2 e:
        m Q1'' + C11 Q1 + 2 C_off Q0 + D11 Q1' + 2 D_off Q0' + f1 u + w1 u' + e P = 0
        m Q0'' + C_off Q1 + (C11 + C_off) Q0 + D_off Q1' + (D11 + D_off) Q0' + f2 u + w2 u' + e P = 0
        e Q1 + 2 e Q0 + phi_f u = 0
    Returns (alpha0, beta0, gamma0, gamma1) of Q0'' + a Q0' + b Q0 = g0 u + g1 u'.
    """
    q0, q0d, q0dd, u, ud, p = sp.symbols("q0 q0d q0dd u ud p")
    e = mc["e"]
    q1 = (-mc["phi_f"] * u - 2 * e * q0) / e
    q1d = (-mc["phi_f"] * ud - 2 * e * q0d) / e
    q1dd = -2 * q0dd  # u'' = 0 for the piecewise-affine strain history
    eq1 = (mc["m"] * q1dd + mc["C_diag"] * q1 + 2 * mc["C_off"] * q0
           + mc["D_diag"] * q1d + 2 * mc["D_off"] * q0d
           + mc["f1"] * u + mc["w1"] * ud + e * p)
    p_sol = sp.solve(sp.Eq(eq1, 0), p)[0]
    eq2 = (mc["m"] * q0dd + mc["C_off"] * q1 + (mc["C_diag"] + mc["C_off"]) * q0
           + mc["D_off"] * q1d + (mc["D_diag"] + mc["D_off"]) * q0d
           + mc["f2"] * u + mc["w2"] * ud + e * p_sol)
    eq2 = sp.expand(eq2)
    big_m = eq2.coeff(q0dd)
    alpha0 = sp.simplify(eq2.coeff(q0d) / big_m)
    beta0 = sp.simplify(eq2.coeff(q0) / big_m)
    gamma0 = sp.simplify(-eq2.coeff(u) / big_m)
    gamma1 = sp.simplify(-eq2.coeff(ud) / big_m)
    return alpha0, beta0, gamma0, gamma1, p_sol


def published_reduced(l0, g, h, rho_s, rho_f, mu, vs, vf):
    dmix = g ** 3 * rho_s + (1 - g) ** 3 * rho_f
    vmix = g * vs + (1 - g) * vf
    return (
        24 * vmix / (l0 ** 2 * dmix),
        16 * g * mu / (l0 ** 2 * dmix),
        -8 * g ** 2 * mu / (h * l0 ** 2 * dmix),
        sp.Rational(4, 3) * (-g ** 2 * vs + (1 - g) ** 2 * vf) / (h * l0 ** 2 * dmix),
    )


def show(name, value):
    value = sp.nsimplify(value, rational=True)
    print(f"{name:34s} = {value}  ->  {float(value)!r}")


def main() -> None:
    print("== cell averages, base cubic cell (g=1/2, h=1/4, l0=1) ==")
    av = cell_averages(L0, G, H)
    for key in ("grad", "grad_square", "square", "grad_product"):
        show(f"{key} solid", av[key][0])
        show(f"{key} fluid", av[key][1])
    show("phi_f", av["phi_f"])

    print("\n== macro coefficients, average inertia ==")
    mc = macro(L0, G, H, RHO_S, RHO_F, LAM, MU, VS, VF)
    for key in ("e", "f1", "f2", "w1", "w2", "C_diag", "C_off", "D_diag", "D_off", "m"):
        show(key, mc[key])

    print("\n== scalar reduction, average inertia ==")
    a0, b0, g0, g1, p_sol = reduce_descriptors(mc)
    show("alpha0", a0)
    show("beta0", b0)
    show("gamma0", g0)
    show("gamma1", g1)

    print("\n== scalar reduction, published inertia ==")
    mcp = macro(L0, G, H, RHO_S, RHO_F, LAM, MU, VS, VF, inertia="published")
    show("m (published)", mcp["m"])
    ap, bp, gp, g1p, _ = reduce_descriptors(mcp)
    show("alpha0", ap)
    show("beta0", bp)
    show("gamma0", gp)
    show("gamma1", g1p)

    print("\n== published closed forms ==")
    pa, pb, pg0, pg1 = published_reduced(L0, G, H, RHO_S, RHO_F, MU, VS, VF)
    show("alpha0", pa)
    show("beta0", pb)
    show("gamma0", pg0)
    show("gamma1", pg1)
    show("discriminant", pa ** 2 - 4 * pb)
    show("q0_infinity", -ETA * pg0 / pb)
    show("relaxation rate beta0/alpha0", pb / pa)
    l0s = sp.symbols("l0star", positive=True)
    pa_l, pb_l, _, _ = published_reduced(l0s, G, H, RHO_S, RHO_F, MU, VS, VF)
    crit = sp.solve(sp.Eq(pa_l ** 2, 4 * pb_l), l0s)
    crit = [c for c in crit if c.is_positive][0]
    show("critical l0", sp.simplify(crit))
    dmix = G ** 3 * RHO_S + (1 - G) ** 3 * RHO_F
    vmix = G * VS + (1 - G) * VF
    show("closed-form 3*vmix/sqrt(g*mu*dmix)", 3 * vmix / sp.sqrt(G * MU * dmix))
    show("discriminant at l0=10",
         (pa / 100) ** 2 - 4 * pb / 100)

    print("\n== settling margins (published coefficients, base scenario) ==")
    kk = pa * pg0 / pb - pg1
    a3 = ETA * kk / (pb * T0)
    show("A3 transient amplitude", a3)
    show("second-settling margin |A3|/q0inf", sp.Abs(a3) / (-ETA * pg0 / pb))

    print("\n== steady-state pressure, average-inertia backend ==")
    # steady state: all rates and accelerations zero, u = -eta
    q0, q0d, q0dd, u, ud = sp.symbols("q0 q0d q0dd u ud")
    q0_inf = -ETA * g0 / b0
    p_inf = p_sol.subs({q0: q0_inf, q0d: 0, q0dd: 0, u: -ETA, ud: 0})
    show("P_infinity", sp.simplify(p_inf))
    # lateral-equation recovery must agree in the steady state
    e = mc["e"]
    q1_inf = (-mc["phi_f"] * -ETA - 2 * e * q0_inf) / e
    h2 = (mc["C_off"] * q1_inf + (mc["C_diag"] + mc["C_off"]) * q0_inf + mc["f2"] * -ETA)
    show("P_infinity via lateral", sp.simplify(-h2 / e))
    show("Q0_infinity (average inertia)", q0_inf)
    show("Q1_infinity (average inertia)", sp.simplify(q1_inf))

    print("\n== published integration constants, float64-relevant values ==")
    mpmath.mp.dps = 50
    al, be, ga, g1f = (mpmath.mpf(str(float(v))) for v in (pa, pb, pg0, pg1))
    eta, t0 = mpmath.mpf("0.01"), mpmath.mpf("10")
    d = al ** 2 - 4 * be
    sq = mpmath.sqrt(d)
    r1, r2 = (-al - sq) / 2, (-al + sq) / 2
    gg = ga * al - be * g1f
    a1 = eta * (al ** 2 * ga - 2 * be * ga - al * be * g1f - sq * gg) / (2 * be ** 2 * t0 * sq)
    a2 = eta * (-2 * be * ga + (al + sq) * gg) / (2 * be ** 2 * t0 * sq)
    pc = eta * (al * ga / be ** 2 - g1f / be) / t0
    ps = -eta * ga / (be * t0)
    print("printed A1                        ", mpmath.nstr(a1, 17))
    print("printed A2                        ", mpmath.nstr(a2, 17))
    print("printed q(0) = pc + A1 + A2      ", mpmath.nstr(pc + a1 + a2, 17))
    print("printed qd(0) = ps + A1r1 + A2r2 ", mpmath.nstr(ps + a1 * r1 + a2 * r2, 17))
    kmp = al * ga / be - g1f
    b1 = 2 * ga - kmp * (-al + sq)
    b2 = -2 * ga + kmp * (-al - sq)
    pref = eta / (2 * be * t0 * sq)
    # defect of the printed post phase against the printed settling phase at t0
    value_defect = pref * (b1 + b2) - eta * kmp / (be * t0)
    slope_defect = pref * (b1 * r1 + b2 * r2) - (-eta * ga / (be * t0))
    print("printed B value defect at t0     ", mpmath.nstr(value_defect, 17))
    print("printed B slope defect at t0     ", mpmath.nstr(slope_defect, 17))
    print("2*eta*|K|/(beta0*t0)             ", mpmath.nstr(2 * eta * abs(kmp) / (be * t0), 17))


if __name__ == "__main__":
    main()
