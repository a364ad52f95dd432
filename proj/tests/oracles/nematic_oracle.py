"""Reference values for the O(N)-nematic mean-field problem.

Moments of x = v_1 under the field h are one-dimensional integrals with weight
(1 - x^2)^{(N-3)/2} exp(a x^2), a = h N/(N-1). They are done with QUADPACK on a window
around the peak of the log-weight. Roots of lambda = <x^2> - 1/N come from a plain
scan plus brentq, and J_MF from brentq on the free-energy difference of the two minima.

Also prints the N -> infinity limits: the lambda at J = 3N implied by
phi_inf(lambda) = -J lambda^2/2 + (1/2) log(1/(1-lambda)) and J_MF^inf / N.

Slow (a few minutes for N = 1000).
"""
import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import betaln


def nem_stats(N, h):
    a = h * N / (N - 1)
    e = (N - 3) / 2
    L = lambda x: (e * np.log1p(-x * x) if e > 0 else 0.0) + a * x * x
    if e == 0:
        xp = 1.0 if a > 0 else 0.0
    else:
        xp = np.sqrt(1 - e / a) if a > e and a > 0 else 0.0
    Lm = L(min(xp, 1 - 1e-300)) if xp < 1 else a
    if 0 < xp < 1:
        c = -(e * (-2 * (1 + xp * xp) / (1 - xp * xp) ** 2) + 2 * a)
        s = 1 / np.sqrt(max(c, 1e-30))
    elif xp == 0:
        c = 2 * e - 2 * a
        s = 1 / np.sqrt(c) if c > 0 else 1.0
    else:
        s = 1.0
    lo, hi = max(0.0, xp - 60 * s), min(1.0, xp + 60 * s)
    f = lambda x, k: x**k * np.exp(L(x) - Lm) if x < 1 else 0.0
    pts = [xp] if lo < xp < hi else None
    kw = dict(points=pts, limit=1000, epsabs=0, epsrel=1e-13)
    Z = quad(f, lo, hi, args=(0,), **kw)[0]
    m2 = quad(f, lo, hi, args=(2,), **kw)[0] / Z
    var = quad(lambda x: (x * x - m2) ** 2 * np.exp(L(x) - Lm) if x < 1 else 0.0, lo, hi, **kw)[0] / Z
    logZ0 = betaln(0.5, e + 1) - np.log(2)
    g = (N - 1) / N * (np.log(Z) + Lm - a / N - logZ0)
    return g, m2 - 1 / N, N / (N - 1) * var


def nem_roots(N, J, n=400):
    F = lambda l: l - nem_stats(N, J * l)[1]
    ls = np.linspace(1e-9, 1 - 1 / N - 1e-9, n)
    v = [F(l) for l in ls]
    out = [0.0]
    for i in range(1, n):
        if v[i - 1] * v[i] < 0:
            out.append(brentq(F, ls[i - 1], ls[i], xtol=1e-14))
    return out


def nem_dphi(N, J):
    rt = nem_roots(N, J)
    if len(rt) < 3:
        return None
    l = rt[-1]
    return J * l * l / 2 - nem_stats(N, J * l)[0]


if __name__ == "__main__":
    # N -> infinity: stationarity of phi_inf gives J lambda (1 - lambda) = 1/2
    print("lambda_inf(J=3) =", 0.5 * (1 + np.sqrt(1 - 2 / 3)))
    # J_MF^inf: phi_inf(lambda) = 0 with J = 1/(2 lambda (1 - lambda)); u = 1 - lambda
    u = brentq(lambda u: (1 - u) / (2 * u) + np.log(u), 0.05, 0.9, xtol=1e-15)
    print("J_MF^inf / N =", 1 / (2 * (1 - u) * u), "lambda =", 1 - u)
    for N in [200, 500, 1000]:
        print(N, "lambda(3N) roots", nem_roots(N, 3 * N), flush=True)
    for N in [3, 4, 200, 500, 1000]:
        J2 = N * (N + 2) / 2
        hi = min(J2 * 0.999999, 3.2 * N)
        lo = next(J for J in np.linspace(1.5 * N, hi, 60) if nem_dphi(N, J) is not None)
        Jmf = brentq(lambda J: nem_dphi(N, J), lo, hi, xtol=1e-10)
        print("N", N, "J_MF", repr(Jmf), "J_MF/N", repr(Jmf / N), "roots", nem_roots(N, Jmf), flush=True)
