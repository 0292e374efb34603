"""Synthetic dataset generators for tests, demos and benchmarks.

Two families: dense Gaussian contexts with a linear concept
(:func:`linear_multiclass`) and sparse binary token streams
(:func:`token_multiclass`), which mimic the text-style data online
learners are usually pointed at.
"""

from __future__ import annotations

import numpy as np

from .dataspace import MULTICLASS, Dataset, Example, LabelSpec
from .rng import single_stream


def linear_multiclass(n: int, n_actions: int = 3, dim: int = 10,
                      seed: int = 0, margin: float = 0.0,
                      flip: float = 0.0, name: str | None = None) -> Dataset:
    """Multiclass data with a linear concept.

    Contexts are standard Gaussian; the label is the argmax score under
    fixed random unit vectors. ``margin`` rejects contexts whose top-two
    score gap is smaller (more separable), ``flip`` relabels that
    fraction of examples uniformly (noisier).
    """
    rng = single_stream(seed)
    directions = rng.normal(size=(n_actions, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    examples = []
    while len(examples) < n:
        x = rng.normal(size=dim)
        scores = directions @ x
        order = np.argsort(scores)
        if margin > 0 and scores[order[-1]] - scores[order[-2]] < margin:
            continue
        label = int(order[-1])
        if flip > 0 and rng.random() < flip:
            label = int(rng.integers(n_actions))
        feats = {i: float(x[i]) for i in range(dim)}
        examples.append(Example(shared=feats,
                                label=LabelSpec(MULTICLASS, y=label + 1)))
    return Dataset(examples, n_actions, MULTICLASS,
                   name=name or f"synth-k{n_actions}-d{dim}-s{seed}")


def token_multiclass(n: int, n_actions: int = 3, seed: int = 0,
                     tokens_per_action: int = 6, noise: float = 0.05,
                     name: str | None = None) -> Dataset:
    """Sparse binary token data: each class owns a token pool.

    An example draws three tokens from its class pool plus one shared
    token; ``noise`` relabels that fraction of examples uniformly.
    """
    gen = single_stream(seed)
    examples = []
    for _ in range(n):
        y = int(gen.integers(n_actions))
        pool = np.arange(y * tokens_per_action, (y + 1) * tokens_per_action)
        tokens = set(gen.choice(pool, size=3, replace=False).tolist())
        tokens.add(n_actions * tokens_per_action + int(gen.integers(4)))
        if noise > 0 and gen.random() < noise:
            y = int(gen.integers(n_actions))
        examples.append(Example(shared={int(t): 1.0 for t in tokens},
                                label=LabelSpec(MULTICLASS, y=y + 1)))
    return Dataset(examples, n_actions, MULTICLASS,
                   name=name or f"tokens-k{n_actions}-s{seed}")
