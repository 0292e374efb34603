import numpy as np
import pytest

from bandit_bakery.dataspace import MULTICLASS, Example, LabelSpec
from bandit_bakery.linreg import RegressorSet
from bandit_bakery.oracles import Policy


def make_example(features, y=1):
    """Example with integer-keyed sparse features and a multiclass label."""
    return Example(shared=dict(features), label=LabelSpec(MULTICLASS, y=y))


def planted_policy(predictions, eta=0.5):
    """Policy whose scores on ``unit_example()`` equal ``predictions``.

    Weights are planted directly; scales stay unseen (treated as 1), so
    predicting on the single feature ``{0: 1.0}`` returns the weight.
    """
    preds = np.asarray(predictions, dtype=float)
    regs = RegressorSet(preds.shape[0], eta=eta)
    regs._ensure_dim(np.array([0], dtype=np.int64))
    for a, value in enumerate(preds):
        regs.weights[a][0] = value
    return Policy(regs)


def unit_example():
    return make_example({0: 1.0})


@pytest.fixture
def rng():
    return np.random.default_rng(7)
