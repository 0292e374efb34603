"""Evaluation: progressive validation, significance tests, win/loss tables.

Progressive validation (PV) is the mean true cost of the actions chosen
online; it reads evaluator-side costs only, so it is invariant to the
loss encoding shown to the learner. Methods are compared per dataset with
a one-sided Z-test on PV losses, aggregated into win/loss matrices, and
exploration logs are scored by how well simple IPS can evaluate the
uniform random policy counterfactually.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dataspace import Dataset, _true_costs
from .linreg import RegressorSet
from .oracles import Policy, csc_update, select
from .rng import run_streams

_DEGENERATE_PV = 1e-6
_SIGNIFICANCE_LEVEL = 0.05


def pv_loss(costs) -> float:
    """Mean true cost of the chosen actions (progressive validation)."""
    costs = np.asarray(getattr(costs, "costs", costs), dtype=float)
    if costs.shape[0] == 0:
        raise ValueError("empty trace has no progressive validation loss")
    return float(costs.mean())


@dataclass(frozen=True)
class NormalizedLoss:
    """PV loss relative to the supervised baseline.

    When the baseline loss is (near) zero the ratio is meaningless; the
    raw difference is reported instead and ``degenerate`` is set.
    """

    value: float
    degenerate: bool = False


def normalized_loss(pv: float, pv_oaa: float) -> NormalizedLoss:
    if pv_oaa < 0:
        raise ValueError("baseline loss must be >= 0")
    if pv_oaa < _DEGENERATE_PV:
        return NormalizedLoss(pv - pv_oaa, degenerate=True)
    return NormalizedLoss((pv - pv_oaa) / pv_oaa)


def oaa_run(ds: Dataset, eta: float, seed: int = 0) -> float:
    """PV loss of the online supervised one-against-all baseline.

    Full information: each round predicts the argmin action (random
    tie-break), records its true cost, then trains on the complete true
    cost vector.
    """
    if len(ds.examples) == 0:
        raise ValueError("empty dataset")
    pol = Policy(RegressorSet(ds.n_actions, eta, adf=ds.kind == "adf"))
    rng = run_streams(seed).tiebreak
    total = 0.0
    for ex in ds.examples:
        action, _ = select(pol, ex, rng)
        costs = _true_costs(ex, ds.n_actions)
        total += float(costs[action])
        csc_update(pol, ex, costs)
    return total / len(ds.examples)


# ---------------------------------------------------------------------------
# Significance
# ---------------------------------------------------------------------------


class Outcome(Enum):
    A_WINS = "a_wins"
    B_WINS = "b_wins"
    TIE = "tie"


# Rational approximation for the standard normal CDF
# (Abramowitz & Stegun 26.2.17 via Zelen & Severo), |error| < 7.5e-8.
_NCDF_B = (0.319381530, -0.356563782, 1.781477937, -1.821255978, 1.330274429)
_NCDF_K = 0.2316419


def normal_cdf(z: float) -> float:
    """Standard normal CDF, dependency-free, absolute error below 1e-7."""
    if z < 0.0:
        return 1.0 - normal_cdf(-z)
    k = 1.0 / (1.0 + _NCDF_K * z)
    poly = 0.0
    for b in reversed(_NCDF_B):
        poly = (poly + b) * k
    pdf = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return 1.0 - pdf * poly


def significance(p_a: float, p_b: float, n_a: int, n_b: int) -> Outcome:
    """One-sided Z-test on two binary-cost PV losses.

    ``a`` wins when its loss is significantly lower, i.e. the normal CDF
    of ``(p_a - p_b)/se`` falls below 0.05; symmetrically for ``b``. A
    zero standard error is a tie when the losses agree, otherwise the
    lower loss wins outright.
    """
    for p in (p_a, p_b):
        if not 0.0 <= p <= 1.0:
            raise ValueError("PV losses must lie in [0, 1]")
    if n_a < 1 or n_b < 1:
        raise ValueError("need at least one round per side")
    var = p_a * (1.0 - p_a) / n_a + p_b * (1.0 - p_b) / n_b
    if var <= 0.0:
        if p_a == p_b:
            return Outcome.TIE
        return Outcome.A_WINS if p_a < p_b else Outcome.B_WINS
    z = (p_a - p_b) / math.sqrt(var)
    if normal_cdf(z) < _SIGNIFICANCE_LEVEL:
        return Outcome.A_WINS
    if normal_cdf(-z) < _SIGNIFICANCE_LEVEL:
        return Outcome.B_WINS
    return Outcome.TIE


# ---------------------------------------------------------------------------
# Win/loss aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunSummary:
    """One method's result on one dataset, ready for pairwise comparison."""

    dataset: str
    method: str
    pv_loss: float
    n_rounds: int
    n_actions: int = 0
    n_features: int = 0
    pv_oaa: float = math.nan


@dataclass(frozen=True)
class DatasetFilter:
    """Dataset subset constraints (action count, size, dimensionality,
    supervised difficulty)."""

    min_actions: int = 0
    min_features: int = 0
    min_examples: int = 0
    max_oaa: float = math.inf

    def keep(self, s: RunSummary) -> bool:
        if s.n_actions < self.min_actions:
            return False
        if s.n_features < self.min_features:
            return False
        if s.n_rounds < self.min_examples:
            return False
        if math.isfinite(self.max_oaa) and not (s.pv_oaa <= self.max_oaa):
            return False
        return True


@dataclass
class WinLossEntry:
    wins: int = 0
    losses: int = 0

    @property
    def difference(self) -> int:
        return self.wins - self.losses


def win_loss_matrix(summaries, methods=None,
                    dataset_filter: DatasetFilter | None = None):
    """Pairwise significant win/loss counts over all shared datasets.

    Returns ``(methods, {(row, col): WinLossEntry}, skipped)`` where
    ``skipped`` lists ``(dataset, row, col)`` pairs that lacked a run on
    one side. Multiple summaries of one (method, dataset) pair -- e.g.
    reshuffles -- are averaged before testing.
    """
    if dataset_filter is not None:
        summaries = [s for s in summaries if dataset_filter.keep(s)]
    if methods is None:
        methods = sorted({s.method for s in summaries})

    grouped: dict = {}
    for s in summaries:
        grouped.setdefault((s.method, s.dataset), []).append(s)
    merged = {
        key: (float(np.mean([s.pv_loss for s in group])),
              int(np.mean([s.n_rounds for s in group])))
        for key, group in grouped.items()
    }
    datasets = sorted({s.dataset for s in summaries})

    matrix = {(a, b): WinLossEntry() for a in methods for b in methods
              if a != b}
    skipped = []
    for a in methods:
        for b in methods:
            if a == b:
                continue
            entry = matrix[(a, b)]
            for ds in datasets:
                ra = merged.get((a, ds))
                rb = merged.get((b, ds))
                if ra is None or rb is None:
                    skipped.append((ds, a, b))
                    continue
                outcome = significance(ra[0], rb[0], ra[1], rb[1])
                if outcome is Outcome.A_WINS:
                    entry.wins += 1
                elif outcome is Outcome.B_WINS:
                    entry.losses += 1
    return methods, matrix, skipped


# ---------------------------------------------------------------------------
# Counterfactual evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CfEstimate:
    estimate: float
    squared_error: float


def cf_ips_uniform(trace, n_actions: int, mode: str = "reward") -> CfEstimate:
    """IPS evaluation of the uniform random policy from exploration logs.

    The truth on binary-cost data is ``1 - 1/K``. Reward mode estimates
    ``1 - mean((1 - cost) / (K p))``; loss mode estimates
    ``mean(cost / (K p))``. Biased whenever the logging policy lacks full
    support, which is exactly what this probe is meant to expose.
    """
    if mode not in ("reward", "loss"):
        raise ValueError(f"unknown mode {mode!r}")
    costs = np.asarray(trace.costs, dtype=float)
    probs = np.asarray(trace.probs, dtype=float)
    if costs.shape[0] == 0:
        raise ValueError("empty trace")
    if mode == "reward":
        estimate = 1.0 - float(np.mean((1.0 - costs) / (n_actions * probs)))
    else:
        estimate = float(np.mean(costs / (n_actions * probs)))
    target = 1.0 - 1.0 / n_actions
    return CfEstimate(estimate, (estimate - target) ** 2)


@dataclass(frozen=True)
class RunResult:
    """A finished run: identity plus the trace the evaluator consumes."""

    dataset: str
    fingerprint: str
    trace: object
    meta: dict = field(default_factory=dict)

    @property
    def n_rounds(self) -> int:
        return self.trace.n

    @property
    def pv(self) -> float:
        return pv_loss(self.trace)
