# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop for Jost-solution propagation.

Advances (f, f') of -f'' + u f = k^2 f through a sequence of cells with a
fourth-order Magnus step built on two Gauss points per cell.  The
oscillatory free part is handled exactly, so the error constant does not
grow with k.
"""

from libc.math cimport atan2, cos, cosh, hypot, sin, sinh, sqrt

import numpy as np


cdef inline double complex _csqrt(double complex z) noexcept nogil:
    cdef double r = sqrt(hypot(z.real, z.imag))
    cdef double t = 0.5 * atan2(z.imag, z.real)
    return r * cos(t) + 1j * r * sin(t)


cdef inline double complex _ccosh(double complex z) noexcept nogil:
    return cosh(z.real) * cos(z.imag) + 1j * sinh(z.real) * sin(z.imag)


cdef inline double complex _csinh(double complex z) noexcept nogil:
    return sinh(z.real) * cos(z.imag) + 1j * cosh(z.real) * sin(z.imag)


def propagate(double[::1] ua, double[::1] ub, double h,
              double complex[::1] ksq,
              double complex[::1] f, double complex[::1] g):
    """Advance the states (f, g=f') through every cell, for every k.

    ua[j], ub[j] are the potential at the first and second Gauss point of
    cell j in the direction of travel; h is the signed step.  f and g are
    modified in place.
    """
    cdef Py_ssize_t nk = ksq.shape[0]
    cdef Py_ssize_t nc = ua.shape[0]
    cdef Py_ssize_t i, j
    cdef double dcoef = sqrt(3.0) * h * h / 12.0
    cdef double d, amu2
    cdef double complex k2, fv, gv, wbar, mu2, mu, ch, shc, fn, gn
    with nogil:
        for i in range(nk):
            k2 = ksq[i]
            fv = f[i]
            gv = g[i]
            for j in range(nc):
                d = dcoef * (ua[j] - ub[j])
                wbar = 0.5 * (ua[j] + ub[j]) - k2
                mu2 = d * d + h * h * wbar
                amu2 = hypot(mu2.real, mu2.imag)
                if amu2 < 1e-8:
                    ch = 1.0 + mu2 * (0.5 + mu2 / 24.0)
                    shc = 1.0 + mu2 * (1.0 / 6.0 + mu2 / 120.0)
                else:
                    mu = _csqrt(mu2)
                    ch = _ccosh(mu)
                    shc = _csinh(mu) / mu
                fn = ch * fv + shc * (d * fv + h * gv)
                gn = ch * gv + shc * (h * wbar * fv - d * gv)
                fv = fn
                gv = gn
            f[i] = fv
            g[i] = gv
