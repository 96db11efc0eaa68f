"""Regenerate the frozen reference numbers used in the test-suite.

Independent of the package: the master equation is written directly in
matrix form, d rho/dt = -i[V(t), rho] + sum_k D[L_k] rho, and integrated
with scipy's DOP853, or its null space is found by applying the map to each
matrix unit. Run with ``python tests/oracles/generate_frozen.py``.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import null_space

G, GP, E = 0, 1, 2


def unit(j, k):
    m = np.zeros((3, 3), complex)
    m[j, k] = 1
    return m


def lindblad(rho, t, P):
    w = P["om"] * (1 + 1j * P["eta"] * np.cos(P["wm"] * t))
    a = P["a"]
    v = (np.conj(w) * unit(E, GP) + w * unit(GP, E)
         + P["g"] * np.conj(a) * unit(E, G) + P["g"] * a * unit(G, E))
    out = -1j * (v @ rho - rho @ v)
    jumps = [(unit(G, E), P["G1"] * (P["nh"] + 1)), (unit(E, G), P["G1"] * P["nh"]),
             (unit(GP, E), P["G2"] * (P["nc"] + 1)), (unit(E, GP), P["G2"] * P["nc"])]
    for L, r in jumps:
        ld = L.conj().T
        out += r * (L @ rho @ ld - 0.5 * (ld @ L @ rho + rho @ ld @ L))
    return out


def static_state(P):
    cols = [lindblad(unit(j, k), 0.0, P).ravel() for j in range(3) for k in range(3)]
    ns = null_space(np.array(cols).T)
    rho = ns[:, 0].reshape(3, 3)
    return rho / np.trace(rho)


def periodic_mean(P, periods=60, n=512):
    T = 2 * np.pi / P["wm"]

    def f(t, y):
        return lindblad(y.reshape(3, 3), t, P).ravel()

    y0 = (np.eye(3) / 3).astype(complex).ravel()
    sol = solve_ivp(f, (0, periods * T), y0, method="DOP853", rtol=1e-13, atol=1e-14)
    ts = periods * T + T * np.arange(n) / n
    sol2 = solve_ivp(f, (periods * T, (periods + 1) * T), sol.y[:, -1], method="DOP853",
                     rtol=1e-13, atol=1e-14, t_eval=ts)
    return sol2.y.reshape(3, 3, -1).mean(axis=2)


base = dict(G1=5.7, G2=5.7, om=10.0, wm=2.0, eta=0.1, g=0.1, nh=0.1, nc=0.05, a=1.0)


def pops(r):
    return [float(r[k, k].real) for k in (G, GP, E)]


if __name__ == "__main__":
    r = static_state(dict(base, om=1.0, wm=0.0, eta=0.0))
    print("static Omega=1 populations", pops(r), "rho_ge", complex(r[G, E]))
    r = static_state(dict(base, om=1.0, wm=0.0, eta=0.0, g=0.0))
    print("static Omega=1 g=0 populations", pops(r))
    for eta in (0.1, 0.5):
        m = periodic_mean(dict(base, eta=eta))
        print(f"periodic mean eta={eta}", pops(m), "rho_ge", complex(m[G, E]))
