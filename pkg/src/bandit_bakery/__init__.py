"""Online contextual bandits with a supervised-to-bandit benchmark harness.

Subpackages by role:

* ``dataspace`` -- datasets, cost vectors, loss encodings, bandit rounds,
* ``linreg``    -- the adaptive importance-weight-aware regression core
  (compiled kernels when available, pure-Python fallback otherwise),
* ``oracles``   -- IPS/DR loss estimators and the CSC/IWR reductions,
* ``explorers`` -- Greedy, epsilon-greedy, active epsilon-greedy, Bag,
  Cover and RegCB explorers plus the generic run loop,
* ``evalkit``   -- progressive validation, Z-test win/loss matrices and
  counterfactual evaluation of the uniform policy,
* ``benchcli``  -- the ``bandit-bakery`` command line harness.
"""

from .backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
