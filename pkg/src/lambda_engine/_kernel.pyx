# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Bloch-equation right-hand side and Dormand-Prince 5(4) stepper.

State layout (NY = 11 reals)::

    0 rho_gg  1 rho_g'g'  2 rho_ee
    3,4 rho_gg' (re, im)  5,6 rho_ge  7,8 rho_g'e
    9,10 probe amplitude a (only evolved in coupled mode)

Parameter layout (NPAR = 15)::

    0 Gamma_eg  1 Gamma_eg'  2 Omega_c  3 omega_m  4 eta  5 kappa  6 g_pr
    7 n_h  8 n_c  9 Re a  10 Im a  11 modulation (0 linear, 1 exact)
    12 gamma_eg  13 gamma_eg'  14 gamma_gg'

Must stay in lockstep with ``_pykernel.py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs, pow

cnp.import_array()

cdef enum:
    NY = 11
    NPAR = 15

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

cdef double SAFETY = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 10.0


cdef void _rhs(double t, const double* y, const double* par, int coupled,
               double* dy) noexcept nogil:
    cdef double gh = par[0], gc = par[1], om = par[2], wm = par[3], eta = par[4]
    cdef double kap = par[5], g = par[6], nh = par[7], nc = par[8]
    cdef double geg = par[12], gegp = par[13], gggp = par[14]
    cdef double c = eta * cos(wm * t)
    cdef double complex w, wc, a, ac, rggp, rge, rgpe, z1, z2
    cdef double complex dggp, dge, dgpe, da
    cdef double pgg = y[0], pgpgp = y[1], pee = y[2]
    cdef double dgg, dgpgp
    if par[11] == 0.0:
        w = om * (1.0 + 1j * c)
    else:
        w = om * (cos(c) + 1j * sin(c))
    wc = w.conjugate()
    rggp = y[3] + 1j * y[4]
    rge = y[5] + 1j * y[6]
    rgpe = y[7] + 1j * y[8]
    if coupled:
        a = y[9] + 1j * y[10]
    else:
        a = par[9] + 1j * par[10]
    ac = a.conjugate()

    z1 = ac * rge
    dgg = -gh * nh * pgg + gh * (nh + 1.0) * pee - 2.0 * g * z1.imag
    z2 = wc * rgpe
    dgpgp = -gc * nc * pgpgp + gc * (nc + 1.0) * pee - 2.0 * z2.imag
    dggp = -gggp * rggp + 1j * wc * rge - 1j * g * a * rgpe.conjugate()
    dge = -geg * rge + 1j * w * rggp - 1j * g * a * (pee - pgg)
    dgpe = -gegp * rgpe - 1j * w * (pee - pgpgp) + 1j * g * a * rggp.conjugate()

    dy[0] = dgg
    dy[1] = dgpgp
    dy[2] = -(dgg + dgpgp)
    dy[3] = dggp.real
    dy[4] = dggp.imag
    dy[5] = dge.real
    dy[6] = dge.imag
    dy[7] = dgpe.real
    dy[8] = dgpe.imag
    if coupled:
        da = -0.5 * kap * a + 1j * g * rge
        dy[9] = da.real
        dy[10] = da.imag
    else:
        dy[9] = 0.0
        dy[10] = 0.0


def rhs(t, y, par, coupled):
    """Evaluate the Bloch right-hand side once; returns a new array."""
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] pv = np.ascontiguousarray(par, dtype=np.float64)
    if yv.shape[0] != NY or pv.shape[0] != NPAR:
        raise ValueError("bad state or parameter length")
    out = np.empty(NY)
    cdef double[::1] o = out
    _rhs(float(t), &yv[0], &pv[0], int(coupled), &o[0])
    return out


cdef double _err_norm(const double* y, const double* ynew, const double* e,
                      double h, double rtol, double atol) noexcept nogil:
    cdef double acc = 0.0, sc, r
    cdef int i
    for i in range(NY):
        sc = atol + rtol * max(fabs(y[i]), fabs(ynew[i]))
        r = h * e[i] / sc
        acc += r * r
    return sqrt(acc / NY)


cdef double _initial_step(double t, const double* y, const double* f0,
                          const double* par, int coupled, double rtol,
                          double atol, double span) noexcept nogil:
    # Hairer-Norsett-Wanner starting step heuristic
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, sc, h0, h1
    cdef double y1[NY]
    cdef double f1[NY]
    cdef int i
    for i in range(NY):
        sc = atol + rtol * fabs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = sqrt(d0 / NY)
    d1 = sqrt(d1 / NY)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    if h0 > span:
        h0 = span
    for i in range(NY):
        y1[i] = y[i] + h0 * f0[i]
    _rhs(t + h0, y1, par, coupled, f1)
    for i in range(NY):
        sc = atol + rtol * fabs(y[i])
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = sqrt(d2 / NY) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / max(d1, d2), 0.2)
    return min(100.0 * h0, h1, span)


def integrate(y0, t_eval, par, coupled, rtol, atol, h0, max_steps, record):
    """Integrate from ``t_eval[0]`` through every later ``t_eval`` point.

    Steps are clipped so each requested time is hit exactly. Returns
    ``(y_eval, rec_t, rec_y, rec_err, stats)``; ``stats`` carries
    ``status`` (0 ok, 1 step underflow, 2 step budget exhausted), the step
    counters, the final time and nominal step.
    """
    return _integrate(np.ascontiguousarray(y0, dtype=np.float64),
                      np.ascontiguousarray(t_eval, dtype=np.float64),
                      np.ascontiguousarray(par, dtype=np.float64), int(coupled),
                      float(rtol), float(atol), float(h0), int(max_steps), bool(record))


cdef _integrate(double[::1] y0, double[::1] t_eval, double[::1] par, int coupled,
                double rtol, double atol, double h0, long max_steps, bint record):
    cdef Py_ssize_t n_eval = t_eval.shape[0]
    if y0.shape[0] != NY or par.shape[0] != NPAR:
        raise ValueError("bad state or parameter length")
    if n_eval < 1:
        raise ValueError("t_eval must be non-empty")

    y_eval_arr = np.empty((n_eval, NY))
    cdef double[:, ::1] y_eval = y_eval_arr

    cdef Py_ssize_t cap = 1024 if record else 1
    rec_t_arr = np.empty(cap)
    rec_y_arr = np.empty((cap, NY))
    rec_e_arr = np.empty(cap)
    cdef double[::1] rec_t = rec_t_arr
    cdef double[:, ::1] rec_y = rec_y_arr
    cdef double[::1] rec_e = rec_e_arr
    cdef Py_ssize_t n_rec = 0

    cdef double y[NY]
    cdef double ynew[NY]
    cdef double ytmp[NY]
    cdef double k1[NY]
    cdef double k2[NY]
    cdef double k3[NY]
    cdef double k4[NY]
    cdef double k5[NY]
    cdef double k6[NY]
    cdef double k7[NY]
    cdef double evec[NY]
    cdef const double* p = &par[0]
    cdef int i, status = 0
    cdef long n_acc = 0, n_rej = 0, n_rhs = 0
    cdef double t = t_eval[0], target, h, h_nom, err, fac, max_err = 0.0
    cdef double span, hmin
    cdef bint clipped, last_rejected = False
    cdef Py_ssize_t j, reached = 1

    for i in range(NY):
        y[i] = y0[i]
        y_eval[0, i] = y[i]
    if record:
        rec_t[0] = t
        for i in range(NY):
            rec_y[0, i] = y[i]
        rec_e[0] = 0.0
        n_rec = 1

    _rhs(t, y, p, coupled, k1)
    n_rhs += 1
    span = t_eval[n_eval - 1] - t
    if h0 > 0:
        h_nom = h0
    elif span > 0:
        h_nom = _initial_step(t, y, k1, p, coupled, rtol, atol, span)
        n_rhs += 1
    else:
        h_nom = 1e-3

    for j in range(1, n_eval):
        target = t_eval[j]
        while t < target:
            hmin = 1e-14 * max(1.0, fabs(t))
            if h_nom < hmin:
                status = 1
                break
            if n_acc + n_rej >= max_steps:
                status = 2
                break
            h = h_nom
            clipped = False
            if t + h >= target - 1e-13 * max(1.0, fabs(target)):
                h = target - t
                clipped = True
            with nogil:
                for i in range(NY):
                    ytmp[i] = y[i] + h * A21 * k1[i]
                _rhs(t + C2 * h, ytmp, p, coupled, k2)
                for i in range(NY):
                    ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
                _rhs(t + C3 * h, ytmp, p, coupled, k3)
                for i in range(NY):
                    ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
                _rhs(t + C4 * h, ytmp, p, coupled, k4)
                for i in range(NY):
                    ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i]
                                          + A54 * k4[i])
                _rhs(t + C5 * h, ytmp, p, coupled, k5)
                for i in range(NY):
                    ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                          + A64 * k4[i] + A65 * k5[i])
                _rhs(t + h, ytmp, p, coupled, k6)
                for i in range(NY):
                    ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                          + B5 * k5[i] + B6 * k6[i])
                _rhs(t + h, ynew, p, coupled, k7)
                for i in range(NY):
                    evec[i] = (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                               + E6 * k6[i] + E7 * k7[i])
                err = _err_norm(y, ynew, evec, h, rtol, atol)
            n_rhs += 6
            if err <= 1.0:
                n_acc += 1
                if clipped:
                    t = target
                else:
                    t = t + h
                for i in range(NY):
                    y[i] = ynew[i]
                    k1[i] = k7[i]
                if err > max_err:
                    max_err = err
                if record:
                    if n_rec >= cap:
                        cap *= 2
                        rec_t_arr = np.resize(rec_t_arr, cap)
                        rec_y_arr = np.resize(rec_y_arr, (cap, NY))
                        rec_e_arr = np.resize(rec_e_arr, cap)
                        rec_t = rec_t_arr
                        rec_y = rec_y_arr
                        rec_e = rec_e_arr
                    rec_t[n_rec] = t
                    for i in range(NY):
                        rec_y[n_rec, i] = y[i]
                    rec_e[n_rec] = err
                    n_rec += 1
                if err == 0.0:
                    fac = FAC_MAX
                else:
                    fac = min(FAC_MAX, max(FAC_MIN, SAFETY * pow(err, -0.2)))
                if last_rejected and fac > 1.0:
                    fac = 1.0
                # a clipped step says nothing about the nominal size
                if not (clipped and h < h_nom):
                    h_nom = h * fac
                last_rejected = False
            else:
                n_rej += 1
                fac = max(FAC_MIN, SAFETY * pow(err, -0.2))
                h_nom = h * fac
                last_rejected = True
        if status != 0:
            break
        for i in range(NY):
            y_eval[j, i] = y[i]
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
    return (y_eval_arr, rec_t_arr[:n_rec].copy(), rec_y_arr[:n_rec].copy(),
            rec_e_arr[:n_rec].copy(), stats)
