"""Pure-Python regression kernels (reference backend).

These three functions are the hot inner loop of every learner in the
package: scaled sparse dot products, the importance-weight-aware online
update, and its virtual (non-mutating) variant used for sensitivities and
confidence bounds.

The compiled backend in ``_kernels.pyx`` mirrors this code operation for
operation; both backends must produce bitwise-identical results
(``tests/test_backends.py`` enforces this). Keep the arithmetic order in
sync when editing either file.

Update semantics
----------------
Weights live in scale-normalized space: a prediction is

    y = bias + sum_i w[i] * x[i] / s[i]

where ``s[i]`` is the largest \\|x[i]\\| observed so far (1 for unseen
features). When a new maximum arrives, weights are rescaled by
``s_new / s_old`` so every previous prediction is preserved.

An update with importance weight ``w`` moves the prediction toward the
target along the exponential path

    y'(w) = target + (y - target) * exp(-w * h),

with per-unit-weight rate ``h = sum_i eta * xt_i^2 / sqrt(G[i] + xt_i^2 *
g0^2)`` for normalized values ``xt_i`` and initial gradient ``g0 = y -
target``. The per-weight squared-gradient accumulators ``G`` absorb the
decay of the current-gradient term, ``min(w, 1 - exp(-2wh)) * (g0 *
xt_i)^2``, which keeps the contribution finite for any ``w`` and makes
consecutive updates with weights ``w1`` then ``w2`` compose exactly into a
single ``w1 + w2`` update whenever the ``w``-weighted cap does not bind.
"""

from math import exp, fabs, sqrt

BACKEND_NAME = "python"


def predict_sparse(w, s, idx, val, bias):
    """Scaled sparse dot product; unseen features use scale 1."""
    y = bias
    for j in range(idx.shape[0]):
        i = idx[j]
        v = val[j]
        sc = s[i]
        if sc > 0.0:
            y += w[i] * (v / sc)
        else:
            y += w[i] * v
    return float(y)


def path_rate(w, g, s, idx, val, target, eta, bias):
    """Return ``(y, h)`` for a virtual update toward ``target``.

    ``y`` is the current prediction and ``h`` the per-unit-weight decay
    rate of the update path. Nothing is mutated; scale maintenance is
    applied virtually (a value larger than the stored scale is normalized
    by itself, which is exactly what a real update would do).
    """
    y = predict_sparse(w, s, idx, val, bias)
    g0 = y - target
    h = 0.0
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
    return y, float(h)


def apply_update(w, g, s, idx, val, target, weight, eta, bias):
    """Apply one importance-weighted update in place.

    Returns ``(y_before, y_after)``. ``weight == 0`` and empty feature
    vectors are no-ops.
    """
    if weight == 0.0 or idx.shape[0] == 0:
        y = predict_sparse(w, s, idx, val, bias)
        return y, y

    # Scale maintenance: rescale weights so previous predictions are
    # preserved under the new normalization.
    for j in range(idx.shape[0]):
        av = fabs(val[j])
        if av == 0.0:
            continue
        i = idx[j]
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
        i = idx[j]
        xt = v / s[i]
        denom = g[i] + xt * xt * g0 * g0
        w[i] = w[i] + alpha * xt / sqrt(denom)
        g[i] = g[i] + gsq * xt * xt
    return y, float(y_new)
