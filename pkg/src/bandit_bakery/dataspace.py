"""Datasets, cost vectors and simulated bandit rounds.

Supervised classification data is turned into bandit problems by treating
labels as actions: each round the learner sees the context, picks an
action, and observes only that action's (encoded) loss, while the
evaluator keeps the true cost for progressive validation.

Text format (UTF-8, one example per line unless ADF):

* optional first line ``K:<n>`` declaring the action count,
* multiclass:      ``<y> | <idx>:<val> ...``,
* multilabel:      ``<y1>,<y2>,... | <idx>:<val> ...``,
* cost-sensitive:  ``<a1>:<c1> <a2>:<c2> ... | <idx>:<val> ...``,
* ADF blocks, separated by blank lines::

      shared | <features>
      <optional cost> | <features>     (one line per action)

Feature values default to 1.0 when ``:<val>`` is omitted. Actions are
1-indexed in files and error messages, 0-indexed in code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MULTICLASS = "multiclass"
MULTILABEL = "multilabel"
COST_SENSITIVE = "cost-sensitive"
ADF = "adf"

# Cost assumed for actions a cost-sensitive line does not mention.
_DEFAULT_COST = 1.0


class ParseError(ValueError):
    """Malformed dataset text; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class LabelSpec:
    """Ground-truth label of one example.

    Exactly one of the payloads is meaningful, selected by ``kind``:
    ``y`` (1-based class) for multiclass, ``labels`` (1-based set) for
    multilabel, ``costs`` for explicit cost vectors.
    """

    kind: str
    y: int = 0
    labels: frozenset = frozenset()
    costs: tuple = ()


@dataclass
class Example:
    """One supervised instance: sparse features plus its label."""

    shared: dict
    label: LabelSpec
    action_features: list | None = None
    _arrays: dict = field(default_factory=dict, repr=False, compare=False)

    def arrays(self, action: int | None = None):
        """Sparse ``(indices, values)`` arrays for the regression kernels.

        ``action is None`` returns the shared features; an action index
        returns shared and per-action features merged (values added on
        index collisions). Indices are sorted so accumulation order is
        deterministic. Zero values are dropped.
        """
        key = -1 if action is None else action
        cached = self._arrays.get(key)
        if cached is not None:
            return cached
        if action is None:
            feats = self.shared
        else:
            feats = dict(self.shared)
            for i, v in self.action_features[action].items():
                feats[i] = feats.get(i, 0.0) + v
        items = sorted((i, v) for i, v in feats.items() if v != 0.0)
        idx = np.fromiter((i for i, _ in items), dtype=np.int64, count=len(items))
        val = np.fromiter((v for _, v in items), dtype=np.float64, count=len(items))
        pair = (idx, val)
        self._arrays[key] = pair
        return pair

    def max_index(self) -> int:
        m = max(self.shared, default=-1)
        if self.action_features:
            for f in self.action_features:
                m = max(m, max(f, default=-1))
        return m


@dataclass(frozen=True)
class Encoding:
    """Additive loss-encoding offset: the learner sees ``offset + cost``."""

    offset: float

    @property
    def c_min(self) -> float:
        return self.offset

    @property
    def c_max(self) -> float:
        return self.offset + 1.0

    @classmethod
    def from_string(cls, text: str) -> "Encoding":
        """Parse ``0/1``, ``-1/0``, ``9/10`` or a bare offset number."""
        named = {"0/1": 0.0, "-1/0": -1.0, "9/10": 9.0}
        if text in named:
            return cls(named[text])
        try:
            return cls(float(text))
        except ValueError:
            raise ValueError(f"unknown encoding {text!r}") from None

    def __str__(self) -> str:
        return f"{self.offset:g}/{self.offset + 1:g}"


@dataclass
class Dataset:
    """Ordered examples with a fixed action count.

    Immutable after parsing by convention; ``shuffle`` returns a new
    Dataset rather than reordering in place.
    """

    examples: list
    n_actions: int
    kind: str
    name: str = "dataset"

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def n_features(self) -> int:
        return 1 + max((ex.max_index() for ex in self.examples), default=-1)

    @property
    def binary_costs(self) -> bool:
        return self.kind in (MULTICLASS, MULTILABEL)


def cost_vector(label: LabelSpec, n_actions: int) -> np.ndarray:
    """True per-action costs in [0, 1] for one example."""
    costs = np.empty(n_actions)
    if label.kind == MULTICLASS:
        if not 1 <= label.y <= n_actions:
            raise ValueError(f"label {label.y} out of range 1..{n_actions}")
        costs.fill(1.0)
        costs[label.y - 1] = 0.0
    elif label.kind == MULTILABEL:
        if not label.labels:
            raise ValueError("empty multilabel set")
        costs.fill(1.0)
        for y in label.labels:
            if not 1 <= y <= n_actions:
                raise ValueError(f"label {y} out of range 1..{n_actions}")
            costs[y - 1] = 0.0
    elif label.kind == COST_SENSITIVE:
        if len(label.costs) != n_actions:
            raise ValueError("cost vector length mismatch")
        costs[:] = label.costs
    else:
        raise ValueError(f"unknown label kind {label.kind!r}")
    return costs


def encode_loss(costs: np.ndarray, enc: Encoding) -> np.ndarray:
    """Losses as the learner observes them: ``offset + cost`` per action."""
    return costs + enc.offset


def bandit_round(ds: Dataset, t: int, action: int, enc: Encoding):
    """Reveal round ``t``'s feedback for one chosen action.

    Returns ``(observed encoded loss, true cost)`` -- two scalars, so the
    unchosen actions' costs are never exposed to the learner.
    """
    if not 0 <= action < ds.n_actions:
        raise ValueError(f"action {action + 1} out of range 1..{ds.n_actions}")
    ex = ds.examples[t]
    costs = _true_costs(ex, ds.n_actions)
    return float(costs[action] + enc.offset), float(costs[action])


def _true_costs(ex: Example, n_actions: int) -> np.ndarray:
    cached = ex._arrays.get("costs")
    if cached is None:
        cached = cost_vector(ex.label, n_actions)
        ex._arrays["costs"] = cached
    return cached


def shuffle(ds: Dataset, seed: int) -> Dataset:
    """Fisher-Yates reorder driven by the dedicated shuffle stream."""
    from .rng import shuffle_stream

    order = list(range(len(ds.examples)))
    gen = shuffle_stream(seed)
    for i in range(len(order) - 1, 0, -1):
        j = int(gen.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return Dataset([ds.examples[i] for i in order], ds.n_actions, ds.kind,
                   name=ds.name)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _parse_features(text: str, lineno: int) -> dict:
    feats = {}
    for tok in text.split():
        name, _, raw = tok.partition(":")
        try:
            idx = int(name)
        except ValueError:
            raise ParseError(lineno, f"bad feature index {name!r}") from None
        if idx < 0:
            raise ParseError(lineno, f"negative feature index {idx}")
        if raw:
            try:
                value = float(raw)
            except ValueError:
                raise ParseError(lineno, f"bad feature value {raw!r}") from None
        else:
            value = 1.0
        if not math.isfinite(value):
            raise ParseError(lineno, f"non-finite feature value {raw!r}")
        feats[idx] = feats.get(idx, 0.0) + value
    return feats


def _parse_label(text: str, lineno: int):
    """Classify and parse the label field left of the bar."""
    text = text.strip()
    if not text:
        raise ParseError(lineno, "empty label field")
    if ":" in text:
        costs = {}
        for tok in text.split():
            name, _, raw = tok.partition(":")
            try:
                a, c = int(name), float(raw)
            except ValueError:
                raise ParseError(lineno, f"bad cost token {tok!r}") from None
            if a < 1:
                raise ParseError(lineno, f"action {a} must be >= 1")
            if not math.isfinite(c):
                raise ParseError(lineno, f"non-finite cost in {tok!r}")
            costs[a] = c
        return COST_SENSITIVE, costs
    if "," in text:
        try:
            labels = frozenset(int(tok) for tok in text.split(","))
        except ValueError:
            raise ParseError(lineno, f"bad multilabel field {text!r}") from None
        if any(y < 1 for y in labels):
            raise ParseError(lineno, "labels must be >= 1")
        return MULTILABEL, labels
    try:
        y = int(text)
    except ValueError:
        raise ParseError(lineno, f"bad label {text!r}") from None
    if y < 1:
        raise ParseError(lineno, f"label {y} must be >= 1")
    return MULTICLASS, y


def parse_dataset(text: str, name: str = "dataset",
                  kind_hint: str | None = None) -> Dataset:
    """Parse dataset text into a :class:`Dataset`.

    The action count is the maximum action index seen unless a ``K:<n>``
    header declares it. The example order of the file is preserved.
    """
    lines = text.splitlines()
    declared_k = None
    start = 0
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            start = lineno
            continue
        if stripped.startswith("K:"):
            try:
                declared_k = int(stripped[2:])
            except ValueError:
                raise ParseError(lineno, f"bad K header {stripped!r}") from None
            if declared_k < 1:
                raise ParseError(lineno, "K must be >= 1")
            start = lineno
        break

    body = [(i, ln) for i, ln in enumerate(lines, start=1) if i > start]
    is_adf = kind_hint == ADF or any(
        ln.strip().lower().startswith("shared") for _, ln in body
    )
    if is_adf:
        return _parse_adf(body, declared_k, name)
    return _parse_flat(body, declared_k, name, kind_hint)


def _parse_flat(body, declared_k, name, kind_hint) -> Dataset:
    rows = []
    kinds = set()
    max_action = 0
    for lineno, line in body:
        stripped = line.strip()
        if not stripped:
            continue
        label_part, bar, feat_part = stripped.partition("|")
        if not bar:
            raise ParseError(lineno, "missing '|' separator")
        kind, payload = _parse_label(label_part, lineno)
        if kind_hint and kind != kind_hint:
            raise ParseError(lineno, f"expected {kind_hint} label, got {kind}")
        kinds.add(kind)
        feats = _parse_features(feat_part, lineno)
        if kind == MULTICLASS:
            max_action = max(max_action, payload)
        elif kind == MULTILABEL:
            max_action = max(max_action, max(payload))
        else:
            max_action = max(max_action, max(payload))
        rows.append((lineno, kind, payload, feats))

    if not rows:
        return Dataset([], declared_k or 1, kind_hint or MULTICLASS, name=name)
    if len(kinds) > 1:
        raise ParseError(rows[0][0], f"mixed label kinds {sorted(kinds)}")
    kind = kinds.pop()

    n_actions = declared_k or max_action
    examples = []
    for lineno, _, payload, feats in rows:
        if kind == MULTICLASS:
            if payload > n_actions:
                raise ParseError(lineno, f"label {payload} exceeds K={n_actions}")
            label = LabelSpec(MULTICLASS, y=payload)
        elif kind == MULTILABEL:
            if max(payload) > n_actions:
                raise ParseError(lineno, f"label set exceeds K={n_actions}")
            label = LabelSpec(MULTILABEL, labels=payload)
        else:
            if max(payload) > n_actions:
                raise ParseError(lineno, f"cost index exceeds K={n_actions}")
            vec = tuple(payload.get(a, _DEFAULT_COST)
                        for a in range(1, n_actions + 1))
            label = LabelSpec(COST_SENSITIVE, costs=vec)
        examples.append(Example(shared=feats, label=label))
    return Dataset(examples, n_actions, kind, name=name)


def _parse_adf(body, declared_k, name) -> Dataset:
    blocks = []
    current = []
    for lineno, line in body:
        if line.strip():
            current.append((lineno, line.strip()))
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)

    n_actions = declared_k
    examples = []
    for block in blocks:
        lineno, first = block[0]
        head, bar, feat_part = first.partition("|")
        if head.strip().lower() != "shared" or not bar:
            raise ParseError(lineno, "ADF block must start with 'shared | ...'")
        shared = _parse_features(feat_part, lineno)
        action_feats = []
        costs = []
        for lineno, line in block[1:]:
            label_part, bar, feat_part = line.partition("|")
            if not bar:
                raise ParseError(lineno, "missing '|' separator")
            label_part = label_part.strip()
            if label_part:
                try:
                    cost = float(label_part)
                except ValueError:
                    raise ParseError(lineno, f"bad cost {label_part!r}") from None
                if not math.isfinite(cost):
                    raise ParseError(lineno, "non-finite cost")
            else:
                cost = _DEFAULT_COST
            costs.append(cost)
            action_feats.append(_parse_features(feat_part, lineno))
        if not action_feats:
            raise ParseError(block[0][0], "ADF block has no action lines")
        if n_actions is None:
            n_actions = len(action_feats)
        elif len(action_feats) != n_actions:
            raise ParseError(
                block[0][0],
                f"ADF block has {len(action_feats)} actions, expected {n_actions}",
            )
        label = LabelSpec(COST_SENSITIVE, costs=tuple(costs))
        examples.append(Example(shared=shared, label=label,
                                action_features=action_feats))
    return Dataset(examples, n_actions or 1, ADF, name=name)


def to_text(ds: Dataset) -> str:
    """Serialize a dataset back to the text format (round-trip helper)."""
    out = [f"K:{ds.n_actions}"]
    for ex in ds.examples:
        feats = " ".join(f"{i}:{v:g}" for i, v in sorted(ex.shared.items()))
        if ds.kind == ADF:
            out.append("")
            out.append(f"shared | {feats}")
            for a in range(ds.n_actions):
                afeats = " ".join(f"{i}:{v:g}"
                                  for i, v in sorted(ex.action_features[a].items()))
                out.append(f"{ex.label.costs[a]:g} | {afeats}")
        elif ds.kind == MULTICLASS:
            out.append(f"{ex.label.y} | {feats}")
        elif ds.kind == MULTILABEL:
            ys = ",".join(str(y) for y in sorted(ex.label.labels))
            out.append(f"{ys} | {feats}")
        else:
            cs = " ".join(f"{a + 1}:{c:g}" for a, c in enumerate(ex.label.costs))
            out.append(f"{cs} | {feats}")
    return "\n".join(out) + "\n"
