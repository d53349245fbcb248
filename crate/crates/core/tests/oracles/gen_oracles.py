"""Reference values for the core tests, computed with mpmath at 30 digits.

phi uses the conical Legendre function P_{-1/2+i lambda}(cosh t); the other
quantities are direct adaptive quadratures of their defining integrals.
Run: python3 gen_oracles.py
"""
import mpmath as mp

mp.mp.dps = 30


def phi(lam, t):
    return mp.re(mp.legenp(-0.5 + 1j * lam, 0, mp.cosh(t), type=3))


def h_sharp(t, lam):
    f = lambda r: phi(lam, r) * mp.sinh(r)
    return 2 * mp.pi / mp.sqrt(mp.cosh(t)) * mp.quad(f, mp.linspace(0, t, 8))


def mehler(lam, r):
    f = lambda u: mp.cos(lam * u) / mp.sqrt(mp.cosh(r) - mp.cosh(u))
    return mp.quad(f, [0, r / 2, r])


def g_sharp0(t):
    f = lambda r: mp.sinh(r) / mp.sqrt(2 * mp.sinh(r / 2) ** 2)
    return mp.sqrt(2 / mp.cosh(t)) * mp.quad(f, [0, t])


def weyl(a, b):
    f = lambda s: s * mp.tanh(mp.pi * s)
    return 2 / (4 * mp.pi) * mp.quad(f, [mp.sqrt(a - 0.25), mp.sqrt(b - 0.25)])


def beta(t, p):
    f = lambda s: mp.exp(p * s / 2 - s / 2) * mp.sqrt(mp.cosh(t) - mp.cosh(s)) * 2
    return mp.exp(-p * t / 2) * mp.quad(f, [0, t])


if __name__ == "__main__":
    print("// phi_lambda(t)")
    for lam in [0.5, 1, 2, 3]:
        for t in [0.5, 1, 2, 5, 10, 20]:
            print(f"({float(lam)!r}, {float(t)!r}, {mp.nstr(phi(lam, t), 20)}),")
    print("// h_sharp(t, lambda)")
    for t in [1, 3, 6]:
        for lam in [0.5, 1, 2]:
            print(f"({t}.0, {lam}, {mp.nstr(h_sharp(t, lam), 20)}),")
    print("// mehler(lambda, r)")
    for lam in [0.5, 2]:
        for r in [2, 7, 20]:
            print(f"({lam}, {r}.0, {mp.nstr(mehler(lam, r), 20)}),")
    print("// g_sharp(0) at t = 1:", mp.nstr(g_sharp0(1), 20))
    print("// weyl [1,4]:", mp.nstr(weyl(1, 4), 20))
    for t in [2, 5, 10, 15]:
        print(f"// beta t={t}:", mp.nstr(beta(t, 1.5), 20))
