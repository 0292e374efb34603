# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled regression kernels.

Operation-for-operation mirror of ``_kernels_py.py`` (see that module for
the update semantics). Any change here must be replicated there; the two
backends are required to be bitwise-identical, which is why the build
disables FP contraction.
"""

from libc.math cimport exp, fabs, sqrt

BACKEND_NAME = "c"


def predict_sparse(double[::1] w, double[::1] s, long long[::1] idx,
                   double[::1] val, double bias):
    cdef double y = bias
    cdef double sc, v
    cdef Py_ssize_t j, i
    for j in range(idx.shape[0]):
        i = <Py_ssize_t> idx[j]
        v = val[j]
        sc = s[i]
        if sc > 0.0:
            y += w[i] * (v / sc)
        else:
            y += w[i] * v
    return y


def path_rate(double[::1] w, double[::1] g, double[::1] s,
              long long[::1] idx, double[::1] val,
              double target, double eta, double bias):
    cdef double y = predict_sparse(w, s, idx, val, bias)
    cdef double g0 = y - target
    cdef double h = 0.0
    cdef double v, av, sc, xt, denom
    cdef Py_ssize_t j
    for j in range(idx.shape[0]):
        v = val[j]
        if v == 0.0:
            continue
        av = fabs(v)
        sc = s[idx[j]]
        if av > sc:
            sc = av
        xt = v / sc
        denom = g[idx[j]] + xt * xt * g0 * g0
        if denom > 0.0:
            h += eta * xt * xt / sqrt(denom)
    return y, h


def apply_update(double[::1] w, double[::1] g, double[::1] s,
                 long long[::1] idx, double[::1] val,
                 double target, double weight, double eta, double bias):
    cdef double y, g0, h, decay, y_new, alpha, frac, gsq
    cdef double v, av, sc, xt, denom
    cdef Py_ssize_t j, i

    if weight == 0.0 or idx.shape[0] == 0:
        y = predict_sparse(w, s, idx, val, bias)
        return y, y

    for j in range(idx.shape[0]):
        av = fabs(val[j])
        if av == 0.0:
            continue
        i = <Py_ssize_t> idx[j]
        sc = s[i]
        if sc == 0.0:
            s[i] = av
        elif av > sc:
            w[i] = w[i] * (av / sc)
            s[i] = av

    y = predict_sparse(w, s, idx, val, bias)
    g0 = y - target
    h = 0.0
    for j in range(idx.shape[0]):
        v = val[j]
        if v == 0.0:
            continue
        xt = v / s[idx[j]]
        denom = g[idx[j]] + xt * xt * g0 * g0
        if denom > 0.0:
            h += eta * xt * xt / sqrt(denom)

    if h <= 0.0 or g0 == 0.0:
        return y, y

    decay = exp(-weight * h)
    y_new = target + g0 * decay
    alpha = eta * (y_new - y) / h
    frac = 1.0 - decay * decay
    if frac > weight:
        frac = weight
    gsq = g0 * g0 * frac
    for j in range(idx.shape[0]):
        v = val[j]
        if v == 0.0:
            continue
        i = <Py_ssize_t> idx[j]
        xt = v / s[i]
        denom = g[i] + xt * xt * g0 * g0
        w[i] = w[i] + alpha * xt / sqrt(denom)
        g[i] = g[i] + gsq * xt * xt
    return y, y_new
