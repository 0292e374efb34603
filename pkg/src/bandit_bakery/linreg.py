"""Online linear regression with adaptive, importance-weight-aware updates.

A :class:`RegressorSet` holds one weight vector per action (or a single
shared vector for action-dependent features), per-weight squared-gradient
accumulators, per-weight running feature scales, and an optional shared
additive baseline term that tracks observed losses with its own scalar
update. See ``_kernels_py`` for the exact update path.

Single-writer mutable state: one learner owns one RegressorSet.
"""

from __future__ import annotations

from math import exp, fabs, sqrt

import numpy as np

from . import backend
from .dataspace import Example

_MIN_DIM = 16


class RegressorSet:
    """Per-action (or ADF-shared) scale-adaptive linear regressors.

    Parameters
    ----------
    n_actions:
        Number of actions scored.
    eta:
        The single tunable step-size parameter.
    adf:
        Share one weight vector across actions and score action ``a``
        with the merged shared+action-``a`` features.
    baseline:
        Enable the action-independent additive baseline term, learned by
        a separate scalar update on observed losses (its step size is
        scaled by the largest observed loss magnitude).
    """

    def __init__(self, n_actions: int, eta: float, adf: bool = False,
                 baseline: bool = False):
        if n_actions < 1:
            raise ValueError("need at least one action")
        if eta <= 0:
            raise ValueError("step size must be positive")
        self.n_actions = n_actions
        self.eta = float(eta)
        self.adf = adf
        self.baseline = baseline
        self.n_regs = 1 if adf else n_actions
        self._dim = 0
        self.weights = np.zeros((self.n_regs, 0))
        self.accums = np.zeros((self.n_regs, 0))
        self.scales = np.zeros((self.n_regs, 0))
        self.counts = np.zeros(n_actions, dtype=np.int64)
        self.theta0 = 0.0
        self._theta0_accum = 0.0
        self.max_loss = 0.0

    # -- plumbing ----------------------------------------------------------

    def _row(self, action: int) -> int:
        if not 0 <= action < self.n_actions:
            raise ValueError(f"action {action} out of range")
        return 0 if self.adf else action

    def _arrays(self, x: Example, action: int):
        return x.arrays(action if self.adf else None)

    def _ensure_dim(self, idx: np.ndarray) -> None:
        if idx.shape[0] == 0:
            return
        need = int(idx[-1]) + 1  # indices are sorted
        if need <= self._dim:
            return
        new_dim = max(_MIN_DIM, 2 * self._dim, need)
        for attr in ("weights", "accums", "scales"):
            old = getattr(self, attr)
            fresh = np.zeros((self.n_regs, new_dim))
            fresh[:, : self._dim] = old
            setattr(self, attr, fresh)
        self._dim = new_dim

    def copy(self) -> "RegressorSet":
        dup = RegressorSet(self.n_actions, self.eta, self.adf, self.baseline)
        dup._dim = self._dim
        dup.weights = self.weights.copy()
        dup.accums = self.accums.copy()
        dup.scales = self.scales.copy()
        dup.counts = self.counts.copy()
        dup.theta0 = self.theta0
        dup._theta0_accum = self._theta0_accum
        dup.max_loss = self.max_loss
        return dup

    # -- scoring -----------------------------------------------------------

    def predict(self, x: Example, action: int) -> float:
        r = self._row(action)
        idx, val = self._arrays(x, action)
        self._ensure_dim(idx)
        return backend.predict_sparse(self.weights[r], self.scales[r],
                                      idx, val, self.theta0)

    def predict_all(self, x: Example) -> np.ndarray:
        return np.array([self.predict(x, a) for a in range(self.n_actions)])

    # -- learning ----------------------------------------------------------

    def update(self, x: Example, action: int, target: float,
               weight: float = 1.0) -> float:
        """One importance-weighted regression step toward ``target``.

        Returns the post-update prediction. ``weight == 0`` is a no-op.
        """
        if weight < 0:
            raise ValueError("importance weight must be >= 0")
        r = self._row(action)
        idx, val = self._arrays(x, action)
        self._ensure_dim(idx)
        _, y_new = backend.apply_update(
            self.weights[r], self.accums[r], self.scales[r],
            idx, val, target, weight, self.eta, self.theta0,
        )
        if weight > 0 and idx.shape[0] > 0:
            self.counts[action] += 1
        return y_new

    def baseline_update(self, loss: float) -> None:
        """Scalar baseline step toward an observed loss; no-op if disabled.

        Runs before the round's per-action updates, which then chase the
        residual automatically because predictions include ``theta0``.
        """
        if not self.baseline:
            return
        mag = fabs(loss)
        if mag > self.max_loss:
            self.max_loss = mag
        g0 = self.theta0 - loss
        denom = self._theta0_accum + g0 * g0
        if denom <= 0.0:
            return
        h = self.eta * self.max_loss / sqrt(denom)
        decay = exp(-h)
        self.theta0 = loss + g0 * decay
        self._theta0_accum += g0 * g0 * (1.0 - decay * decay)

    # -- virtual paths -----------------------------------------------------

    def rate(self, x: Example, action: int, target: float):
        """Current prediction and per-unit-weight decay rate, no mutation."""
        r = self._row(action)
        idx, val = self._arrays(x, action)
        self._ensure_dim(idx)
        return backend.path_rate(self.weights[r], self.accums[r],
                                 self.scales[r], idx, val, target,
                                 self.eta, self.theta0)

    def sensitivity(self, x: Example, action: int, target: float) -> float:
        """|d prediction / d importance weight| at weight 0 (>= 0)."""
        y, h = self.rate(x, action, target)
        return h * fabs(y - target)

    def displacement(self, x: Example, action: int, target: float,
                     weight: float) -> float:
        """Prediction after a virtual update of the given weight."""
        y, h = self.rate(x, action, target)
        return target + (y - target) * exp(-weight * h)

    # -- debugging ---------------------------------------------------------

    def dump_weights(self):
        """Yield ``weight <action> <index> <value>`` lines (1-based action).

        Debug format only, not a stability contract. In ADF mode the
        shared vector is reported as action 1.
        """
        for r in range(self.n_regs):
            for i in np.flatnonzero(self.weights[r]):
                yield f"weight {r + 1} {i} {self.weights[r][i]!r}"
