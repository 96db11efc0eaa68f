"""Pure-Python fallback for the compiled kernel in ``_kernel.pyx``.

Same state/parameter layouts and the same Dormand-Prince 5(4) step control,
so both backends agree to rounding.
"""

import math

import numpy as np

NY = 11
NPAR = 15

A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52 = 19372.0 / 6561.0, -25360.0 / 2187.0
A53, A54 = 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0
A64, A65 = 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0
B5, B6 = -2187.0 / 6784.0, 11.0 / 84.0
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
E1, E3, E4 = 71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0
E5, E6, E7 = -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0


def _rhs(t, y, par, coupled):
    gh, gc, om, wm, eta, kap, g, nh, nc = par[:9]
    geg, gegp, gggp = par[12], par[13], par[14]
    c = eta * math.cos(wm * t)
    if par[11] == 0.0:
        w = om * complex(1.0, c)
    else:
        w = om * complex(math.cos(c), math.sin(c))
    wc = w.conjugate()
    pgg, pgpgp, pee = y[0], y[1], y[2]
    rggp = complex(y[3], y[4])
    rge = complex(y[5], y[6])
    rgpe = complex(y[7], y[8])
    a = complex(y[9], y[10]) if coupled else complex(par[9], par[10])

    z1 = a.conjugate() * rge
    dgg = -gh * nh * pgg + gh * (nh + 1.0) * pee - 2.0 * g * z1.imag
    z2 = wc * rgpe
    dgpgp = -gc * nc * pgpgp + gc * (nc + 1.0) * pee - 2.0 * z2.imag
    dggp = -gggp * rggp + 1j * wc * rge - 1j * g * a * rgpe.conjugate()
    dge = -geg * rge + 1j * w * rggp - 1j * g * a * (pee - pgg)
    dgpe = -gegp * rgpe - 1j * w * (pee - pgpgp) + 1j * g * a * rggp.conjugate()
    if coupled:
        da = -0.5 * kap * a + 1j * g * rge
    else:
        da = 0j
    return [dgg, dgpgp, -(dgg + dgpgp), dggp.real, dggp.imag, dge.real,
            dge.imag, dgpe.real, dgpe.imag, da.real, da.imag]


def rhs(t, y, par, coupled):
    y = [float(v) for v in y]
    par = [float(v) for v in par]
    if len(y) != NY or len(par) != NPAR:
        raise ValueError("bad state or parameter length")
    return np.array(_rhs(float(t), y, par, int(coupled)))


def _err_norm(y, ynew, e, h, rtol, atol):
    acc = 0.0
    for yi, yn, ei in zip(y, ynew, e):
        r = h * ei / (atol + rtol * max(abs(yi), abs(yn)))
        acc += r * r
    return math.sqrt(acc / NY)


def _initial_step(t, y, f0, par, coupled, rtol, atol, span):
    d0 = d1 = d2 = 0.0
    for yi, fi in zip(y, f0):
        sc = atol + rtol * abs(yi)
        d0 += (yi / sc) ** 2
        d1 += (fi / sc) ** 2
    d0 = math.sqrt(d0 / NY)
    d1 = math.sqrt(d1 / NY)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = [yi + h0 * fi for yi, fi in zip(y, f0)]
    f1 = _rhs(t + h0, y1, par, coupled)
    for yi, fa, fb in zip(y, f1, f0):
        sc = atol + rtol * abs(yi)
        d2 += ((fa - fb) / sc) ** 2
    d2 = math.sqrt(d2 / NY) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, span)


def integrate(y0, t_eval, par, coupled, rtol, atol, h0, max_steps, record):
    t_eval = [float(v) for v in t_eval]
    par = [float(v) for v in par]
    y = [float(v) for v in y0]
    coupled = int(coupled)
    if len(y) != NY or len(par) != NPAR:
        raise ValueError("bad state or parameter length")
    if not t_eval:
        raise ValueError("t_eval must be non-empty")

    y_eval = np.empty((len(t_eval), NY))
    y_eval[0] = y
    t = t_eval[0]
    rec_t, rec_y, rec_e = ([t], [list(y)], [0.0]) if record else ([], [], [])
    n_acc = n_rej = 0
    status = 0
    max_err = 0.0
    last_rejected = False
    reached = 1

    k1 = _rhs(t, y, par, coupled)
    n_rhs = 1
    span = t_eval[-1] - t
    if h0 > 0:
        h_nom = h0
    elif span > 0:
        h_nom = _initial_step(t, y, k1, par, coupled, rtol, atol, span)
        n_rhs += 1
    else:
        h_nom = 1e-3

    r = range(NY)
    for j in range(1, len(t_eval)):
        target = t_eval[j]
        while t < target:
            if h_nom < 1e-14 * max(1.0, abs(t)):
                status = 1
                break
            if n_acc + n_rej >= max_steps:
                status = 2
                break
            h = h_nom
            clipped = False
            if t + h >= target - 1e-13 * max(1.0, abs(target)):
                h = target - t
                clipped = True
            k2 = _rhs(t + C2 * h, [y[i] + h * A21 * k1[i] for i in r], par, coupled)
            k3 = _rhs(t + C3 * h, [y[i] + h * (A31 * k1[i] + A32 * k2[i])
                                   for i in r], par, coupled)
            k4 = _rhs(t + C4 * h, [y[i] + h * (A41 * k1[i] + A42 * k2[i]
                                               + A43 * k3[i]) for i in r],
                      par, coupled)
            k5 = _rhs(t + C5 * h, [y[i] + h * (A51 * k1[i] + A52 * k2[i]
                                               + A53 * k3[i] + A54 * k4[i])
                                   for i in r], par, coupled)
            k6 = _rhs(t + h, [y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                          + A64 * k4[i] + A65 * k5[i])
                              for i in r], par, coupled)
            ynew = [y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                + B5 * k5[i] + B6 * k6[i]) for i in r]
            k7 = _rhs(t + h, ynew, par, coupled)
            evec = [E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                    + E6 * k6[i] + E7 * k7[i] for i in r]
            err = _err_norm(y, ynew, evec, h, rtol, atol)
            n_rhs += 6
            if err <= 1.0:
                n_acc += 1
                t = target if clipped else t + h
                y = ynew
                k1 = k7
                max_err = max(max_err, err)
                if record:
                    rec_t.append(t)
                    rec_y.append(list(y))
                    rec_e.append(err)
                if err == 0.0:
                    fac = FAC_MAX
                else:
                    fac = min(FAC_MAX, max(FAC_MIN, SAFETY * err ** -0.2))
                if last_rejected and fac > 1.0:
                    fac = 1.0
                if not (clipped and h < h_nom):
                    h_nom = h * fac
                last_rejected = False
            else:
                n_rej += 1
                h_nom = h * max(FAC_MIN, SAFETY * err ** -0.2)
                last_rejected = True
        if status != 0:
            break
        y_eval[j] = y
        reached += 1

    stats = {
        "status": status,
        "n_accepted": n_acc,
        "n_rejected": n_rej,
        "n_rhs": n_rhs,
        "max_error_norm": max_err,
        "t_final": t,
        "h_nominal": h_nom,
        "n_eval_reached": reached,
    }
    return (y_eval, np.array(rec_t), np.array(rec_y).reshape(-1, NY),
            np.array(rec_e), stats)
