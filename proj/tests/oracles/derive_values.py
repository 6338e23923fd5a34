#!/usr/bin/env python3
"""Independent high-precision oracle for the frozen expected values in the
unit tests. Run it manually; the test sources carry its output verbatim."""
import mpmath as mp
import sympy as sp

mp.mp.dps = 40


def show(label, value):
    print(f"{label:60s} {mp.nstr(value, 25)}")


# Deformed logs evaluated straight from their defining formulas.
def tsallis_log(q, x):
    return (mp.mpf(x) ** (1 - q) - 1) / (1 - q)


def kaniadakis_log(k, x):
    x = mp.mpf(x)
    return (x**k - x ** (-k)) / (2 * k)


show("tsallis q=0.5 log(4)", tsallis_log(mp.mpf("0.5"), 4))
show("tsallis q=0.5 dlog(4)", mp.diff(lambda t: tsallis_log(mp.mpf("0.5"), t), 4))
show("kaniadakis k=0.5 log(4)", kaniadakis_log(mp.mpf("0.5"), 4))
show("tsallis q=0.5 exp(2)", (1 + mp.mpf("0.5") * 2) ** 2)
k = mp.mpf("0.5")
show("kaniadakis k=0.5 exp(1.5)", (mp.sqrt(1 + k**2 * mp.mpf("1.5") ** 2) + k * mp.mpf("1.5")) ** (1 / k))
show("tsallis entropy q=0.5 p=(.5,.5)", 2 * mp.mpf("0.5") * tsallis_log(mp.mpf("0.5"), 2))

# Potentials by quadrature, not antiderivatives.
show("F natural(e)", mp.quad(mp.log, [1, mp.e]))
show("F tsallis q=.5 (4)", mp.quad(lambda t: tsallis_log(mp.mpf("0.5"), t), [1, 4]))
w = [mp.mpf("0.5"), mp.mpf("0.5")]
v = [mp.mpf("0.25"), mp.mpf("0.75")]
show("bregman natural", sum(mp.quad(lambda t: mp.log(t) - mp.log(vi), [vi, wi]) for wi, vi in zip(w, v)))

# EG step and cross-entropy gradient.
show("EG step w1", mp.mpf("0.5") * mp.exp(-mp.log(2)) / (mp.mpf("0.5") * mp.exp(-mp.log(2)) + mp.mpf("0.5")))
show("portfolio loss r=(2,1) u=(.5,.5)", -mp.log(mp.mpf("1.5")))

# Series coefficients of the generic (phi, alpha, sigma) log in u = ln x,
# obtained by symbolic Taylor expansion of the defining formula.
u, X = sp.symbols("u X", real=True)


def series_coeffs(phi, alpha, sigma):
    xs = sp.exp(u)
    dphi = sp.diff(phi, X)
    pref = 1 / (1 - alpha * dphi.subs(X, alpha))
    expr = pref * ((phi.subs(X, alpha * xs ** (-sigma)) - xs ** (-sigma)) / sigma + (1 - phi.subs(X, alpha)) / sigma)
    ser = sp.series(expr, u, 0, 4).removeO()
    c1 = sp.nsimplify(ser.coeff(u, 1))
    a1 = sp.simplify(2 * ser.coeff(u, 2))
    a2 = sp.simplify(6 * ser.coeff(u, 3))
    return sp.simplify(c1), a1, a2


R = sp.Rational
cases = [
    ("linear a=2 c=0.5 alpha=0.2 sigma=-0.3", 2 * X - R(1, 2), R(1, 5), R(-3, 10)),
    ("reciprocal alpha=1 sigma=0.4", 1 / X, 1, R(2, 5)),
    ("reciprocal alpha=2 sigma=0.4", 1 / X, 2, R(2, 5)),
    ("threeparam k=.5 r=.2 l=2 alpha=1 sigma=-1",
     2 ** R(1, 2) * X ** R(7, 10) - 2 ** R(-1, 2) * X ** R(-3, 10) + X, 1, -1),
    ("quadratic-ish (X + X^2/4) alpha=0.5 sigma=0.3", X + X**2 / 4, R(1, 2), R(3, 10)),
]
for label, phi, alpha, sigma in cases:
    c1, a1, a2 = series_coeffs(phi, alpha, sigma)
    print(f"series {label:48s} c1={c1}  a1={sp.N(a1, 25)}  a2={sp.N(a2, 25)}")

# Cubic coefficient of the inverse series: invert y = u + a1/2 u^2 + a2/6 u^3,
# then expand exp(u(y)).
A1, A2, y = sp.symbols("a1 a2 y")
b2, b3 = sp.symbols("b2 b3")
useries = y + b2 * y**2 + b3 * y**3
eq = sp.expand(useries + A1 / 2 * useries**2 + A2 / 6 * useries**3 - y)
sol = sp.solve([eq.coeff(y, 2), eq.coeff(y, 3)], [b2, b3], dict=True)[0]
xser = sp.series(sp.exp(useries.subs(sol)), y, 0, 4).removeO()
print("exp series c2 =", sp.factor(xser.coeff(y, 2)))
print("exp series c3 =", sp.expand(xser.coeff(y, 3)))
