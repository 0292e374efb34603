"""Loss estimators and reductions to regression.

Estimators turn one interaction record ``(x, a, loss, p)`` into a full
estimated loss vector (IPS, or doubly-robust with a learned loss
regressor). Reductions turn estimates into policy updates: cost-sensitive
classification becomes one regression step per action, while
importance-weighted regression (IWR) updates only the chosen action with
weight ``1/p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataspace import Example
from .linreg import RegressorSet

IPS = "ips"
DR = "dr"
IWR = "iwr"
REDUCTIONS = (IPS, DR, IWR)


@dataclass
class InteractionRecord:
    """The unit of bandit feedback: what the learner saw and did."""

    x: Example
    action: int
    loss: float
    prob: float

    def __post_init__(self):
        if not 0.0 < self.prob <= 1.0 + 1e-9:
            raise ValueError(
                f"action probability must be in (0, 1], got {self.prob}")
        if not np.isfinite(self.loss):
            raise ValueError("observed loss must be finite")


@dataclass
class Policy:
    """Argmin-of-predicted-loss policy over a regressor set."""

    regs: RegressorSet

    def predictions(self, x: Example) -> np.ndarray:
        preds = self.regs.predict_all(x)
        if not np.isfinite(preds).all():
            raise FloatingPointError("non-finite policy predictions")
        return preds


def argmin_ties(preds: np.ndarray) -> np.ndarray:
    """Indices tied (bitwise-equal) for the lowest prediction."""
    return np.flatnonzero(preds == preds.min())


def tie_mass(preds: np.ndarray) -> np.ndarray:
    """Unit mass spread uniformly over the argmin tie set."""
    ties = argmin_ties(preds)
    mass = np.zeros(preds.shape[0])
    mass[ties] = 1.0 / ties.shape[0]
    return mass


def select(pol: Policy, x: Example, rng) -> tuple:
    """Pick the argmin action, uniformly among exact ties.

    Returns ``(action, tie-set size)``.
    """
    ties = argmin_ties(pol.predictions(x))
    return int(ties[rng.integers(ties.shape[0])]), int(ties.shape[0])


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def ips_estimate(rec: InteractionRecord, n_actions: int) -> np.ndarray:
    """Inverse-propensity estimate: ``loss/p`` at the chosen action."""
    est = np.zeros(n_actions)
    est[rec.action] = rec.loss / rec.prob
    return est


def dr_estimate(rec: InteractionRecord, lossreg: RegressorSet,
                n_actions: int) -> np.ndarray:
    """Doubly-robust estimate: regressor prediction plus IPS correction."""
    est = np.array([lossreg.predict(rec.x, a) for a in range(n_actions)])
    est[rec.action] += (rec.loss - est[rec.action]) / rec.prob
    return est


def lossreg_update(lossreg: RegressorSet, rec: InteractionRecord) -> None:
    """One weight-1 regression step of the loss estimator on the record."""
    lossreg.baseline_update(rec.loss)
    lossreg.update(rec.x, rec.action, rec.loss, 1.0)


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------


def csc_update(pol: Policy, x: Example, costs: np.ndarray) -> None:
    """Cost-sensitive step: one regression update per action."""
    if len(costs) != pol.regs.n_actions:
        raise ValueError("cost vector length mismatch")
    for a in range(pol.regs.n_actions):
        pol.regs.update(x, a, float(costs[a]), 1.0)


def iwr_update(pol: Policy, rec: InteractionRecord) -> None:
    """Importance-weighted regression step on the chosen action only."""
    pol.regs.update(rec.x, rec.action, rec.loss, 1.0 / rec.prob)


def off_policy_update(pol: Policy, rec: InteractionRecord, reduction: str,
                      n_actions: int, lossreg: RegressorSet | None = None,
                      estimate: np.ndarray | None = None) -> None:
    """Dispatch one off-policy learning step through the chosen reduction.

    For DR the loss regressor is updated first, so the correction uses the
    freshest estimate. ``estimate`` short-circuits the estimator when the
    caller already computed this round's loss estimate (Bag reuses one
    estimate for repeated updates).
    """
    if reduction not in REDUCTIONS:
        raise ValueError(f"unknown reduction {reduction!r}")
    pol.regs.baseline_update(rec.loss)
    if reduction == IWR:
        iwr_update(pol, rec)
        return
    if estimate is None:
        estimate = make_estimate(rec, reduction, n_actions, lossreg)
    csc_update(pol, rec.x, estimate)


def make_estimate(rec: InteractionRecord, reduction: str, n_actions: int,
                  lossreg: RegressorSet | None = None,
                  update_lossreg: bool = True) -> np.ndarray:
    """Estimated loss vector for the round (IPS or DR)."""
    if reduction == IPS:
        return ips_estimate(rec, n_actions)
    if reduction == DR:
        if lossreg is None:
            raise ValueError("DR reduction requires a loss regressor")
        if update_lossreg:
            lossreg_update(lossreg, rec)
        return dr_estimate(rec, lossreg, n_actions)
    raise ValueError(f"reduction {reduction!r} has no loss estimator")
