"""Regenerate ``frozen.json`` from high-precision brute-force computations.

Every value here is computed with mpmath by a route that shares no code
with the package:

* OU quadratic functionals from the backward matrix Riccati equation
  ``K' = K^2 - (D K + K D) - Q``, ``K(x) = 0``, giving
  ``E exp(-1/2 int_0^x xi^T Q xi) = exp(-1/2 int_0^x tr K)``.
* traces of the f2 kernel by adaptive quadrature of its diagonal.
* determinants and eigenvalues directly in 40-digit arithmetic.

Run ``python tests/oracles/generate.py`` to rewrite the JSON.
"""

import json
from pathlib import Path

import mpmath as mp
import numpy as np

mp.mp.dps = 40
OUT = Path(__file__).with_name("frozen.json")


def ou_expectation(p, c, a, x):
    n = len(p)
    D = mp.diag([mp.mpf(v) for v in p])
    cv = mp.matrix([mp.mpf(v) for v in c])
    Q = mp.mpf(a) ** 2 * (cv * cv.T)

    def rhs(s, y):
        # integrate in reversed time s = x - y; y holds K (n*n) then g
        K = mp.matrix(n, n)
        for i in range(n):
            for j in range(n):
                K[i, j] = y[i * n + j]
        dK = -(K * K - (D * K + K * D) - Q)
        return [dK[i, j] for i in range(n) for j in range(n)] + [sum(K[i, i] for i in range(n)) / 2]

    sol = mp.odefun(rhs, 0, [mp.mpf(0)] * (n * n + 1))
    g = sol(mp.mpf(x))[-1]
    return mp.exp(-g)


def f2_trace_quad(p, c, a, x):
    def diag(u):
        return sum(mp.mpf(a) ** 2 * ci**2 / (2 * pi) * (mp.exp(2 * pi * x) - mp.exp(2 * pi * u)) * mp.exp(-2 * pi * u)
                   for pi, ci in zip(map(mp.mpf, p), map(mp.mpf, c)))

    return mp.quad(diag, [0, x])


def f2_trace_closed(p, c, a, x):
    return sum(mp.mpf(a) ** 2 * ci**2 / (4 * pi**2) * (mp.exp(2 * pi * x) - 2 * pi * x - 1)
               for pi, ci in zip(map(mp.mpf, p), map(mp.mpf, c)))


def aihara(lam, C):
    n = len(lam)
    M = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            M[i, j] = (mp.cosh(lam[j]) if i == j else 0) + C[i, j] * mp.sinh(lam[j])
    return mp.det(M)


def kdv_area_target(eta, m, x, t):
    n = len(eta)
    eta = [mp.mpf(v) for v in eta]
    P = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            P[i, j] = 1 / (eta[i] + eta[j])
    I = mp.eye(n)
    C = (I - P) * mp.inverse(I + P)
    lam = [e * x + e**3 * t - mp.log(mv) / 2 for e, mv in zip(eta, map(mp.mpf, m))]
    return 1 / aihara(lam, C)


def legendre_rule(n, a, b):
    x0, _ = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    for guess in x0:
        r = mp.findroot(lambda z: mp.legendre(n, z), mp.mpf(guess))
        dp = mp.diff(lambda z: mp.legendre(n, z), r)
        nodes.append((b - a) / 2 * r + (a + b) / 2)
        weights.append((b - a) / 2 * 2 / ((1 - r**2) * dp**2))
    return nodes, weights


def cauchy_tau(nodes, weights, x, t):
    n = len(nodes)
    M = mp.matrix(n, n)
    for i in range(n):
        r = weights[i] * mp.exp(8 * nodes[i] ** 3 * t - 2 * nodes[i] * x)
        for j in range(n):
            M[i, j] = (1 if i == j else 0) + r / (nodes[i] + nodes[j])
    return mp.det(M)


def spd_instance(seed=20240611, n=4):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((n, n))
    phi = 0.15 * (b @ b.T) + 0.05 * np.eye(n)
    return phi


def main():
    out = {}
    out["ou_n1"] = {"p": [-1.0], "c": [1.0], "a": 1.0, "x": 1.0,
                    "value": float(ou_expectation([-1.0], [1.0], 1.0, 1.0))}
    # one-dimensional Cameron-Martin closed form as a cross-check of the ODE route
    g = mp.sqrt(2)
    cm = mp.exp(mp.mpf(1) / 2) * (mp.cosh(g) + mp.sinh(g) / g) ** mp.mpf(-0.5)
    assert abs(cm - ou_expectation([-1.0], [1.0], 1.0, 1.0)) < mp.mpf(10) ** -25
    out["ou_n2"] = {"p": [-1.0, 0.5], "c": [1.0, 0.7], "a": 1.0, "x": 1.0,
                    "value": float(ou_expectation([-1.0, 0.5], [1.0, 0.7], 1.0, 1.0))}
    tq = f2_trace_quad([-1.0, 0.5], [1.0, 0.7], 1.0, 1.0)
    assert abs(tq - f2_trace_closed([-1.0, 0.5], [1.0, 0.7], 1.0, 1.0)) < mp.mpf(10) ** -25
    out["f2_trace_n2"] = {"p": [-1.0, 0.5], "c": [1.0, 0.7], "a": 1.0, "x": 1.0, "value": float(tq)}
    out["levy_n1"] = {"lam": 0.5, "value": float(1 / mp.cosh(mp.mpf("0.5")))}
    out["levy_kdv_n2"] = {"eta": [0.5, 0.8], "m": [0.6, 0.5], "x": 0.0, "t": 0.0,
                          "value": float(kdv_area_target([0.5, 0.8], [0.6, 0.5], 0, 0))}
    phi = spd_instance()
    lam = mp.eigsy(mp.matrix(phi.tolist()))[0]
    target = mp.fprod((1 + l) ** mp.mpf(-0.5) * mp.exp(l / 2) for l in lam)
    out["privault_n4"] = {"phi": phi.tolist(), "value": float(target)}
    n16, w16 = legendre_rule(16, 1, 2)
    n40, w40 = legendre_rule(40, 1, 2)
    out["uniform_density"] = {
        "support": [1.0, 2.0], "x": 2.0, "t": 0.0,
        "tau_16": float(cauchy_tau(n16, w16, 2, 0)),
        "tau_continuum": float(cauchy_tau(n40, w40, 2, 0)),
    }
    OUT.write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
