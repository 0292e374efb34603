"""Exploration algorithms and the generic explore/learn loop.

Every algorithm implements ``explore(x) -> distribution`` and
``learn(record)``; the :func:`run` driver wires them to a simulated
bandit stream and records the trace the evaluator needs.

Implemented: Greedy / epsilon-greedy, active epsilon-greedy (disagreement
sets via regressor sensitivities), Bag and Bag-greedy (online Bootstrap
Thompson sampling), Cover and Cover-NU (diversity-rewarded policy cover),
and RegCB in its optimistic and elimination variants (confidence bounds
from virtual importance-weighted updates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataspace import Dataset, Encoding, Example, bandit_round
from .linreg import RegressorSet
from .oracles import (
    DR,
    IPS,
    IWR,
    REDUCTIONS,
    InteractionRecord,
    Policy,
    csc_update,
    make_estimate,
    off_policy_update,
    tie_mass,
)
from .rng import RunStreams, run_streams

ALGORITHMS = (
    "greedy", "egreedy", "active", "bag", "bag-greedy",
    "cover", "cover-nu", "regcb-opt", "regcb-elim",
)

_W_CAP = 2.0 ** 24  # largest virtual importance weight searched
_SUM_TOL = 1e-6


@dataclass
class ExplorerConfig:
    """One run's algorithm choice and hyperparameters."""

    algo: str
    eta: float = 0.5
    epsilon: float = 0.05
    n_policies: int = 4
    psi: float = 0.1
    c0: float = 1e-3
    reduction: str = IWR
    encoding: Encoding = field(default_factory=lambda: Encoding(-1.0))
    baseline: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.reduction not in REDUCTIONS:
            raise ValueError(f"unknown reduction {self.reduction!r}")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if self.n_policies < 1:
            raise ValueError("bag/cover size must be >= 1")
        if self.psi <= 0:
            raise ValueError("psi must be positive")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.algo.startswith("cover") and self.reduction == IWR:
            raise ValueError("cover does not support the iwr reduction")
        if self.algo == "active" and self.epsilon == 0.0:
            raise ValueError("active epsilon-greedy needs epsilon > 0")


def _fresh_policy(ds: Dataset, cfg: ExplorerConfig) -> Policy:
    return Policy(RegressorSet(ds.n_actions, cfg.eta, adf=ds.kind == "adf",
                               baseline=cfg.baseline))


def _fresh_lossreg(ds: Dataset, cfg: ExplorerConfig) -> RegressorSet | None:
    if cfg.reduction != DR:
        return None
    return RegressorSet(ds.n_actions, cfg.eta, adf=ds.kind == "adf",
                        baseline=cfg.baseline)


class EpsilonGreedy:
    """Uniform epsilon exploration around the greedy choice (Alg. class).

    ``epsilon == 0`` is the Greedy algorithm. The greedy mass is spread
    uniformly over the exact argmin tie set.
    """

    def __init__(self, ds: Dataset, cfg: ExplorerConfig, streams: RunStreams):
        self.k = ds.n_actions
        self.epsilon = cfg.epsilon
        self.reduction = cfg.reduction
        self.policy = _fresh_policy(ds, cfg)
        self.lossreg = _fresh_lossreg(ds, cfg)

    def explore(self, x: Example) -> np.ndarray:
        preds = self.policy.predictions(x)
        p = np.full(self.k, self.epsilon / self.k)
        p += (1.0 - self.epsilon) * tie_mass(preds)
        return p

    def learn(self, rec: InteractionRecord) -> None:
        off_policy_update(self.policy, rec, self.reduction, self.k,
                          self.lossreg)


class ActiveEpsilonGreedy:
    """Epsilon-greedy restricted to the disagreement set.

    Uniform exploration only covers actions whose estimated loss
    difference to the greedy action is below the threshold
    ``sqrt(c0*K*log(t)/(eps*t)) + c0*K*log(t)/(eps*t)``; actions left
    unexplored are trained with cost ``c_max`` (CSC mode) or skipped
    (IWR mode).
    """

    def __init__(self, ds: Dataset, cfg: ExplorerConfig, streams: RunStreams):
        self.k = ds.n_actions
        self.epsilon = cfg.epsilon
        self.c0 = cfg.c0
        self.c_min = cfg.encoding.c_min
        self.c_max = cfg.encoding.c_max
        self.reduction = cfg.reduction
        self.policy = _fresh_policy(ds, cfg)
        self.lossreg = _fresh_lossreg(ds, cfg)
        self.rounds = 0
        self._last_p: np.ndarray | None = None
        self._last_admissible: np.ndarray | None = None

    def threshold(self, t: int) -> float:
        inner = self.c0 * self.k * math.log(t) / (self.epsilon * t)
        return math.sqrt(inner) + inner

    def loss_diffs(self, x: Example, preds: np.ndarray, t: int) -> np.ndarray:
        """Estimated per-action empirical loss differences vs. greedy."""
        y_star = preds.min()
        diffs = np.zeros(self.k)
        if self.reduction == IWR:
            for a in range(self.k):
                if preds[a] <= y_star:
                    continue
                sens = self.policy.regs.sensitivity(x, a, self.c_min)
                tau = (preds[a] - y_star) / sens if sens > 0 else math.inf
                diffs[a] = max(0.0, tau) / t
            return diffs
        # CSC mode: sensitivities against virtual one-vs-all cost vectors
        # scaled into the encoding range.
        sens_low = np.array([self.policy.regs.sensitivity(x, a, self.c_min)
                             for a in range(self.k)])
        sens_high = np.array([self.policy.regs.sensitivity(x, a, self.c_max)
                              for a in range(self.k)])
        for a_bar in range(self.k):
            tau = crossing_weight(preds, sens_low[a_bar], sens_high, a_bar)
            diffs[a_bar] = max(0.0, tau) / t
        return diffs

    def explore(self, x: Example) -> np.ndarray:
        t = self.rounds + 1
        preds = self.policy.predictions(x)
        admissible = self.loss_diffs(x, preds, t) <= self.threshold(t)
        p = np.zeros(self.k)
        p[admissible] = self.epsilon / self.k
        residual = 1.0 - self.epsilon * admissible.sum() / self.k
        p += residual * tie_mass(preds)
        self._last_p = p
        self._last_admissible = admissible
        return p

    def learn(self, rec: InteractionRecord) -> None:
        self.rounds += 1
        if self.reduction == IWR:
            self.policy.regs.baseline_update(rec.loss)
            self.policy.regs.update(rec.x, rec.action, rec.loss,
                                    1.0 / rec.prob)
            return
        est = make_estimate(rec, self.reduction, self.k, self.lossreg)
        costs = np.where(self._last_p > 0.0, est, self.c_max)
        self.policy.regs.baseline_update(rec.loss)
        csc_update(self.policy, rec.x, costs)


def crossing_weight(preds: np.ndarray, sens_bar: float,
                    sens_high: np.ndarray, a_bar: int) -> float:
    """Importance weight needed for ``a_bar`` to beat every other action.

    Predictions cross under a virtual CSC update when
    ``y(a_bar) - s(a_bar) w = y(a) + s(a) w``; a zero denominator means
    the pair never crosses (weight 0 if ``a_bar`` already wins, else
    infinite).
    """
    tau = -math.inf
    for a in range(preds.shape[0]):
        if a == a_bar:
            continue
        denom = sens_bar + sens_high[a]
        gap = preds[a_bar] - preds[a]
        if denom > 0:
            w = gap / denom
        else:
            w = 0.0 if gap <= 0 else math.inf
        tau = max(tau, w)
    return 0.0 if tau == -math.inf else tau


class Bag:
    """Online Bootstrap Thompson sampling over N policies.

    Each policy votes for its greedy tie set; learning feeds each policy
    a Poisson(1) number of repeated updates. With ``greedy_first`` the
    first policy always gets exactly one update (Bag-greedy).
    """

    def __init__(self, ds: Dataset, cfg: ExplorerConfig, streams: RunStreams,
                 greedy_first: bool):
        self.k = ds.n_actions
        self.reduction = cfg.reduction
        self.greedy_first = greedy_first
        self.policies = [_fresh_policy(ds, cfg)
                         for _ in range(cfg.n_policies)]
        self.lossreg = _fresh_lossreg(ds, cfg)
        self.poisson = streams.poisson
        self.oracle_calls = [0] * cfg.n_policies

    def explore(self, x: Example) -> np.ndarray:
        p = np.zeros(self.k)
        for pol in self.policies:
            p += tie_mass(pol.predictions(x))
        return p / len(self.policies)

    def learn(self, rec: InteractionRecord) -> None:
        estimate = None
        if self.reduction != IWR:
            # Shared loss-estimate for the round; the DR loss regressor
            # sees the record exactly once.
            estimate = make_estimate(rec, self.reduction, self.k,
                                     self.lossreg)
        for i, pol in enumerate(self.policies):
            if i == 0 and self.greedy_first:
                tau = 1
            else:
                tau = int(self.poisson.poisson(1.0))
            for _ in range(tau):
                off_policy_update(pol, rec, self.reduction, self.k,
                                  estimate=estimate)
            self.oracle_calls[i] += tau


def cover_costs(est: np.ndarray, q: np.ndarray, eps_t: float,
                psi: float) -> np.ndarray:
    """Diversity-rewarded cost vector for one covering policy.

    The reward is ``psi`` in full for actions no previous policy covers
    (``q == 0``) and decays with ``psi * eps_t`` otherwise.
    """
    return est - psi * eps_t / (eps_t + (1.0 - eps_t) * q)


class Cover:
    """Online Cover: one on-data policy plus diversity-rewarded cover.

    Policies beyond the first are trained on :func:`cover_costs` vectors,
    where ``q`` counts how previous policies cover each action. The NU
    variant skips the uniform smoothing of the exploration distribution.
    """

    def __init__(self, ds: Dataset, cfg: ExplorerConfig, streams: RunStreams,
                 smooth: bool):
        self.k = ds.n_actions
        self.psi = cfg.psi
        self.smooth = smooth
        self.reduction = cfg.reduction
        self.policies = [_fresh_policy(ds, cfg)
                         for _ in range(cfg.n_policies)]
        self.lossreg = _fresh_lossreg(ds, cfg)
        self.rounds = 0

    def eps_t(self, t: int) -> float:
        return min(1.0 / self.k, 1.0 / math.sqrt(self.k * t))

    def explore(self, x: Example) -> np.ndarray:
        eps = self.eps_t(self.rounds + 1)
        counts = np.zeros(self.k)
        for pol in self.policies:
            counts += tie_mass(pol.predictions(x))
        counts /= len(self.policies)
        if self.smooth:
            return eps / self.k + (1.0 - eps) * counts
        return counts

    def learn(self, rec: InteractionRecord) -> None:
        eps = self.eps_t(self.rounds + 1)
        est = make_estimate(rec, self.reduction, self.k, self.lossreg)
        first = self.policies[0]
        first.regs.baseline_update(rec.loss)
        csc_update(first, rec.x, est)
        covered = tie_mass(first.predictions(rec.x))
        for i, pol in enumerate(self.policies[1:], start=2):
            q = covered / (i - 1)
            costs = cover_costs(est, q, eps, self.psi)
            pol.regs.baseline_update(rec.loss)
            csc_update(pol, rec.x, costs)
            covered += tie_mass(pol.predictions(rec.x))
        self.rounds += 1


class RegCB:
    """Confidence-bound exploration from regressor sensitivities.

    Per-action bounds come from virtual importance-weighted updates
    toward ``c_min - 1`` / ``c_max + 1``: the bound is the prediction at
    the largest virtual weight whose excess squared loss stays below
    ``c0 * log(K t) / t``. The optimistic variant plays the smallest
    lower bound; the elimination variant explores uniformly over actions
    whose lower bound does not exceed the smallest upper bound.
    """

    def __init__(self, ds: Dataset, cfg: ExplorerConfig, streams: RunStreams,
                 optimistic: bool):
        self.k = ds.n_actions
        self.c0 = cfg.c0
        self.c_min = cfg.encoding.c_min
        self.c_max = cfg.encoding.c_max
        self.optimistic = optimistic
        self.regs = RegressorSet(ds.n_actions, cfg.eta,
                                 adf=ds.kind == "adf", baseline=cfg.baseline)
        self.rounds = 0

    def width_budget(self, t: int) -> float:
        return self.c0 * math.log(self.k * t) / t

    def _clip(self, y: float) -> float:
        return min(self.c_max, max(self.c_min, y))

    def _bound(self, x: Example, action: int, target: float, t: int) -> float:
        """One side of the confidence interval via binary search on w."""
        y, h = self.regs.rate(x, action, target)
        t_a = int(self.regs.counts[action])
        budget = self.width_budget(t)
        scale = t_a / t
        g0 = y - target

        def excess(w: float) -> float:
            disp = g0 * (1.0 - math.exp(-w * h))
            return scale * disp * disp

        if excess(_W_CAP) <= budget:
            w_star = _W_CAP
        else:
            lo, hi = 0.0, 1.0
            if excess(1.0) <= budget:
                w = 1.0
                while True:
                    nxt = 2.0 * w
                    if nxt >= _W_CAP:
                        lo, hi = w, _W_CAP
                        break
                    if excess(nxt) > budget:
                        lo, hi = w, nxt
                        break
                    w = nxt
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if excess(mid) <= budget:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 1e-6 * hi:
                    break
            w_star = lo
        return self._clip(target + g0 * math.exp(-w_star * h))

    def bounds(self, x: Example, action: int, t: int | None = None) -> tuple:
        """Clipped ``(lower, upper)`` loss bounds for one action."""
        t = self.rounds + 1 if t is None else t
        lower = self._bound(x, action, self.c_min - 1.0, t)
        upper = self._bound(x, action, self.c_max + 1.0, t)
        return lower, upper

    def explore(self, x: Example) -> np.ndarray:
        t = self.rounds + 1
        lowers = np.empty(self.k)
        uppers = np.empty(self.k)
        for a in range(self.k):
            lowers[a], uppers[a] = self.bounds(x, a, t)
        if self.optimistic:
            return regcb_opt_distribution(lowers)
        return regcb_elim_distribution(lowers, uppers)

    def learn(self, rec: InteractionRecord) -> None:
        self.regs.baseline_update(rec.loss)
        self.regs.update(rec.x, rec.action, rec.loss, 1.0)
        self.rounds += 1


def regcb_opt_distribution(lowers: np.ndarray) -> np.ndarray:
    """Optimistic rule: uniform over the smallest lower bound."""
    return tie_mass(lowers)


def regcb_elim_distribution(lowers: np.ndarray,
                            uppers: np.ndarray) -> np.ndarray:
    """Elimination rule: uniform over plausibly-best actions.

    The argmin of the upper bounds always qualifies, so the support is
    provably non-empty.
    """
    support = np.flatnonzero(lowers <= uppers.min())
    assert support.size > 0, "elimination support cannot be empty"
    p = np.zeros(lowers.shape[0])
    p[support] = 1.0 / support.size
    return p


def make_explorer(ds: Dataset, cfg: ExplorerConfig, streams: RunStreams):
    cfg.validate()
    if cfg.algo == "greedy":
        greedy_cfg = ExplorerConfig(**{**cfg.__dict__, "epsilon": 0.0})
        return EpsilonGreedy(ds, greedy_cfg, streams)
    if cfg.algo == "egreedy":
        return EpsilonGreedy(ds, cfg, streams)
    if cfg.algo == "active":
        return ActiveEpsilonGreedy(ds, cfg, streams)
    if cfg.algo == "bag":
        return Bag(ds, cfg, streams, greedy_first=False)
    if cfg.algo == "bag-greedy":
        return Bag(ds, cfg, streams, greedy_first=True)
    if cfg.algo == "cover":
        return Cover(ds, cfg, streams, smooth=True)
    if cfg.algo == "cover-nu":
        return Cover(ds, cfg, streams, smooth=False)
    if cfg.algo == "regcb-opt":
        return RegCB(ds, cfg, streams, optimistic=True)
    if cfg.algo == "regcb-elim":
        return RegCB(ds, cfg, streams, optimistic=False)
    raise ValueError(f"unknown algorithm {cfg.algo!r}")


@dataclass
class Trace:
    """Per-round record of one run, as the evaluator sees it."""

    probs: np.ndarray      # p_t(a_t)
    actions: np.ndarray    # chosen actions (0-based)
    enc_losses: np.ndarray  # learner-side encoded losses
    costs: np.ndarray      # evaluator-side true costs

    @property
    def n(self) -> int:
        return self.actions.shape[0]


def sample_action(p: np.ndarray, rng) -> int:
    """Inverse-CDF draw from an action distribution."""
    r = rng.random()
    acc = 0.0
    for a in range(p.shape[0] - 1):
        acc += p[a]
        if r < acc:
            return a
    return p.shape[0] - 1


def check_distribution(p: np.ndarray, t: int) -> None:
    if not np.isfinite(p).all():
        raise FloatingPointError(
            f"non-finite exploration distribution at round {t} "
            "(learning likely diverged; lower the learning rate)")
    if (p < -1e-12).any() or abs(float(p.sum()) - 1.0) > _SUM_TOL:
        raise FloatingPointError(f"invalid action distribution at round {t}")


def run(ds: Dataset, cfg: ExplorerConfig) -> Trace:
    """Drive one explorer over a dataset, one pass, online.

    Per round: explore, sample the action, reveal its loss, learn. The
    trace carries the evaluator-side true cost next to the learner-side
    encoded loss.
    """
    streams = run_streams(cfg.seed)
    explorer = make_explorer(ds, cfg, streams)
    n = len(ds.examples)
    probs = np.empty(n)
    actions = np.empty(n, dtype=np.int64)
    enc_losses = np.empty(n)
    costs = np.empty(n)
    for t, ex in enumerate(ds.examples):
        p = explorer.explore(ex)
        check_distribution(p, t + 1)
        a = sample_action(p, streams.sampling)
        observed, true_cost = bandit_round(ds, t, a, cfg.encoding)
        explorer.learn(InteractionRecord(ex, a, observed, float(p[a])))
        probs[t] = p[a]
        actions[t] = a
        enc_losses[t] = observed
        costs[t] = true_cost
    return Trace(probs, actions, enc_losses, costs)
